//! Gate teleportation: a Clifford circuit cut into stages, all stages run in
//! parallel on Bell pairs, and one classical round fixes the accumulated
//! Pauli byproducts.
//!
//! Register layout for D stages on n data qubits, in blocks of n qubits:
//! block 0 is the input Q₀; for stage j (0-based) block 2j+1 is the Bell half
//! Aⱼ and block 2j+2 is Qⱼ₊₁, which receives stage j's unitary. Stage j
//! measures (Qⱼ, Aⱼ) in the Bell basis, so the outcome bit of a measured
//! qubit sits at that qubit's own index. Block 2D is the output.

use serde::Serialize;

use crate::bits::{BitMatrix, BitVec};
use crate::circuit::{Gate, Layer, LayeredCircuit, C64};
use crate::error::{MhError, Result};
use crate::pauli::PauliString;
use crate::region::Region;
use crate::simulate::{
    dense_run, run_measurement_program, tableau_run, ClassicalMap, MeasurementProgram, OutcomeSource, Round,
    StabilizerSim, StateVector,
};
use crate::stabilizer::{conjugate_pauli, StabilizerTableau};

/// F2-linear map from outcome bits to the final Pauli correction X^{x′}Z^{z′}:
/// rows 0..n give x′, rows n..2n give z′.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorrectionMap {
    pub n: usize,
    pub stages: usize,
    pub layers_per_stage: usize,
    pub matrix: BitMatrix,
}

impl CorrectionMap {
    pub fn outcome_bits(&self) -> usize {
        self.matrix.cols()
    }

    /// Column of the Z-type outcome (data half) of stage `j`, qubit `q`.
    pub fn z_column(&self, j: usize, q: usize) -> usize {
        2 * j * self.n + q
    }

    /// Column of the X-type outcome (Bell half) of stage `j`, qubit `q`.
    pub fn x_column(&self, j: usize, q: usize) -> usize {
        (2 * j + 1) * self.n + q
    }

    pub fn apply(&self, y: &BitVec) -> Result<(Vec<bool>, Vec<bool>)> {
        if y.len() != self.matrix.cols() {
            return Err(MhError::Dimension(format!(
                "correction map expects {} outcome bits, got {}",
                self.matrix.cols(),
                y.len()
            )));
        }
        let v = self.matrix.mul_vec(y).to_bools();
        Ok((v[..self.n].to_vec(), v[self.n..].to_vec()))
    }
}

pub(crate) fn check_clifford_input(c: &LayeredCircuit) -> Result<()> {
    if c.has_measurement() {
        return Err(MhError::GateClass("teleportation compiles unitary Clifford circuits only".into()));
    }
    for g in c.gates() {
        if !g.is_clifford_kind() || matches!(g.kind, crate::circuit::GateKind::ClassicalParity { .. }) {
            return Err(MhError::GateClass(format!("{} is not a Clifford unitary", g.kind.name())));
        }
    }
    Ok(())
}

pub(crate) fn split_stages(c: &LayeredCircuit, layers_per_stage: usize) -> Result<Vec<Vec<Layer>>> {
    if layers_per_stage == 0 {
        return Err(MhError::invalid("layers_per_stage must be positive"));
    }
    check_clifford_input(c)?;
    Ok(c.layers().chunks(layers_per_stage).map(|ch| ch.to_vec()).collect())
}

fn shift(g: &Gate, offset: usize) -> Gate {
    Gate { kind: g.kind.clone(), qubits: g.qubits.iter().map(|q| q + offset).collect() }
}

/// Outcome-indicator Paulis (Z for the data half, X for the Bell half) pushed
/// through the rest of the circuit, one per outcome column, phases kept.
pub(crate) fn conjugated_byproducts(n: usize, stages: &[Vec<Layer>]) -> Result<Vec<PauliString>> {
    let d = stages.len();
    let mut cols = vec![PauliString::identity(n); 2 * n * d];
    for j in 0..d {
        for q in 0..n {
            for (col, ch) in [(2 * j * n + q, 'Z'), ((2 * j + 1) * n + q, 'X')] {
                let mut p = PauliString::single(n, q, ch)?;
                for stage in &stages[j..] {
                    for layer in stage {
                        for g in layer {
                            conjugate_pauli(&mut p, g)?;
                        }
                    }
                }
                cols[col] = p;
            }
        }
    }
    Ok(cols)
}

pub(crate) fn map_from_byproducts(n: usize, cols: &[PauliString]) -> BitMatrix {
    let mut m = BitMatrix::zeros(2 * n, cols.len());
    for (c, p) in cols.iter().enumerate() {
        m.set_column(c, &p.symplectic());
    }
    m
}

/// Correction map for `c` cut into stages of `layers_per_stage` layers.
pub fn extract_correction_map(c: &LayeredCircuit, layers_per_stage: usize) -> Result<CorrectionMap> {
    let stages = split_stages(c, layers_per_stage)?;
    let cols = conjugated_byproducts(c.n(), &stages)?;
    Ok(CorrectionMap {
        n: c.n(),
        stages: stages.len(),
        layers_per_stage,
        matrix: map_from_byproducts(c.n(), &cols),
    })
}

/// Bell preparation, every stage unitary in parallel, and the Bell-basis
/// rotations, on the full register (measurements excluded).
pub(crate) fn teleport_block(n: usize, stages: &[Vec<Layer>], width: usize) -> Result<LayeredCircuit> {
    let d = stages.len();
    let total = n * (2 * d + 1);
    let mut block = LayeredCircuit::new(total);
    if d == 0 {
        return Ok(block);
    }
    let a = |j: usize, q: usize| (2 * j + 1) * n + q;
    let data = |j: usize, q: usize| 2 * j * n + q;
    block.push_layer((0..d).flat_map(|j| (0..n).map(move |q| Gate::h(a(j, q)))).collect())?;
    block.push_layer((0..d).flat_map(|j| (0..n).map(move |q| Gate::cnot(a(j, q), data(j + 1, q)))).collect())?;
    for l in 0..width {
        let mut layer = Vec::new();
        for (j, stage) in stages.iter().enumerate() {
            if let Some(src) = stage.get(l) {
                layer.extend(src.iter().map(|g| shift(g, data(j + 1, 0))));
            }
        }
        block.push_layer(layer)?;
    }
    block.push_layer((0..d).flat_map(|j| (0..n).map(move |q| Gate::cnot(data(j, q), a(j, q)))).collect())?;
    block.push_layer((0..d).flat_map(|j| (0..n).map(move |q| Gate::h(data(j, q)))).collect())?;
    Ok(block)
}

/// Measurement program for `c`: one quantum round of depth `layers_per_stage + 4`
/// independent of the number of stages, then the correction on the output block.
pub fn teleport_parallelize(
    c: &LayeredCircuit,
    layers_per_stage: usize,
) -> Result<(MeasurementProgram, CorrectionMap)> {
    let stages = split_stages(c, layers_per_stage)?;
    let n = c.n();
    let d = stages.len();
    let cols = conjugated_byproducts(n, &stages)?;
    let map = CorrectionMap { n, stages: d, layers_per_stage, matrix: map_from_byproducts(n, &cols) };
    let width = stages.iter().map(|s| s.len()).max().unwrap_or(0);
    let block = teleport_block(n, &stages, width)?;
    let total = block.n();
    let output = Region::from_iter_unchecked(2 * d * n..(2 * d + 1) * n);
    let measured = Region::from_iter_unchecked(0..2 * d * n);
    let correction = if d == 0 { None } else { Some(ClassicalMap { targets: output.clone(), matrix: map.matrix.clone() }) };
    let program = MeasurementProgram { n: total, rounds: vec![Round { block, measured, correction }], output };
    Ok((program, map))
}

/// Runs the program on `input` (a stabilizer state on the data qubits) with
/// forced or seeded outcomes and checks the output block against the direct
/// Clifford action, as tableaux.
pub fn verify_teleport_tableau(
    c: &LayeredCircuit,
    layers_per_stage: usize,
    input: &StabilizerTableau,
    outcomes: &OutcomeSource,
) -> Result<bool> {
    let (p, _) = teleport_parallelize(c, layers_per_stage)?;
    let want = tableau_run(c, input)?;
    verify_program_tableau(&p, input, &want, outcomes)
}

/// Runs an already built program and compares its output block with `want`.
pub fn verify_program_tableau(
    p: &MeasurementProgram,
    input: &StabilizerTableau,
    want: &StabilizerTableau,
    outcomes: &OutcomeSource,
) -> Result<bool> {
    let full = input.tensor(&StabilizerTableau::zero_state(p.n - input.n()));
    let (sim, _) = run_measurement_program(p, StabilizerSim::new(&full), outcomes)?;
    let got = sim.to_tableau().restrict(&p.output)?;
    Ok(&got == want)
}

/// Dense version: fidelity between the corrected output block and `c|ψ⟩`.
pub fn verify_teleport_dense(
    c: &LayeredCircuit,
    layers_per_stage: usize,
    input: &StateVector,
    outcomes: &OutcomeSource,
) -> Result<f64> {
    let (p, _) = teleport_parallelize(c, layers_per_stage)?;
    let n = c.n();
    let rest = StateVector::zeros(p.n - n)?;
    let full = input.tensor(&rest)?;
    let (out, tr) = run_measurement_program(&p, full, outcomes)?;
    let amps = out.amplitudes();
    let mut base = 0usize;
    for (i, &o) in tr.outcomes.iter().enumerate() {
        if o {
            base |= 1 << p.rounds[0].measured.qubits()[i];
        }
    }
    let shift = p.output.qubits().first().copied().unwrap_or(0);
    let reduced: Vec<C64> = (0..1usize << n).map(|j| amps[base | (j << shift)]).collect();
    let got = StateVector::normalized(reduced)?;
    let want = dense_run(c, input)?;
    Ok(got.fidelity(&want))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;
    use crate::random::{random_clifford_circuit, random_stabilizer_state};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_input(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
        let amps: Vec<C64> =
            (0..1usize << n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        StateVector::normalized(amps).unwrap()
    }

    #[test]
    fn single_cnot_all_forced_outcomes() {
        let c = parse_circuit("CNOT 0 1").unwrap();
        let (p, map) = teleport_parallelize(&c, 1).unwrap();
        assert_eq!(map.stages, 1);
        assert_eq!(p.total_measured(), 4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = random_input(2, &mut rng);
        for y in 0..16usize {
            let forced: Vec<bool> = (0..4).map(|i| (y >> i) & 1 == 1).collect();
            let f = verify_teleport_dense(&c, 1, &psi, &OutcomeSource::Forced(forced)).unwrap();
            assert!(f > 1.0 - 1e-10, "outcomes {y:04b}: fidelity {f}");
        }
    }

    #[test]
    fn identity_circuit_passes_input_through() {
        let c = LayeredCircuit::new(3);
        let (p, map) = teleport_parallelize(&c, 2).unwrap();
        assert_eq!(map.stages, 0);
        assert_eq!(p.total_measured(), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let psi = random_input(3, &mut rng);
        assert!(verify_teleport_dense(&c, 2, &psi, &OutcomeSource::Seeded(0)).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn identity_suffix_gives_block_identity() {
        let c = LayeredCircuit::from_layers(2, vec![vec![]]).unwrap();
        let m = extract_correction_map(&c, 1).unwrap();
        for q in 0..2 {
            // Z-type outcome feeds z′, X-type outcome feeds x′
            for r in 0..4 {
                assert_eq!(m.matrix.get(r, m.z_column(0, q)), r == 2 + q);
                assert_eq!(m.matrix.get(r, m.x_column(0, q)), r == q);
            }
        }
    }

    #[test]
    fn cnot_suffix_spreads_x() {
        let c = parse_circuit("CNOT 0 1").unwrap();
        let m = extract_correction_map(&c, 1).unwrap();
        let col = m.matrix.column(m.x_column(0, 0)).to_bools();
        assert_eq!(col, vec![true, true, false, false]);
        let col = m.matrix.column(m.z_column(0, 1)).to_bools();
        assert_eq!(col, vec![false, false, true, true]);
    }

    #[test]
    fn depth_thirty_matches_tableau() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let c = random_clifford_circuit(6, 30, &mut rng);
        let (p, map) = teleport_parallelize(&c, 5).unwrap();
        assert_eq!(map.stages, 6);
        assert_eq!(p.quantum_depth(), 9);
        for t in 0..50u64 {
            let input = random_stabilizer_state(6, &mut rng);
            assert!(verify_teleport_tableau(&c, 5, &input, &OutcomeSource::Seeded(t)).unwrap());
        }
    }

    #[test]
    fn linearity_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = random_clifford_circuit(4, 6, &mut rng);
        let m = extract_correction_map(&c, 2).unwrap();
        let k = m.outcome_bits();
        for _ in 0..100 {
            let y1 = BitVec::from_bools(&(0..k).map(|_| rng.random_bool(0.5)).collect::<Vec<_>>());
            let y2 = BitVec::from_bools(&(0..k).map(|_| rng.random_bool(0.5)).collect::<Vec<_>>());
            let mut s = y1.clone();
            s.xor_assign(&y2);
            let mut lhs = m.matrix.mul_vec(&y1);
            lhs.xor_assign(&m.matrix.mul_vec(&y2));
            assert_eq!(lhs, m.matrix.mul_vec(&s));
        }
    }

    #[test]
    fn rejects_non_clifford() {
        let c = parse_circuit("H 0 / T 0").unwrap();
        assert!(matches!(teleport_parallelize(&c, 1), Err(MhError::GateClass(_))));
    }
}
