//! Adaptive measurement programs: quantum blocks, Z measurements, and
//! F2-linear Pauli corrections computed from all outcomes so far.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::statevector::StateVector;
use super::tableau::StabilizerSim;
use crate::bits::{BitMatrix, BitVec};
use crate::circuit::{Gate, GateKind, LayeredCircuit};
use crate::error::{MhError, Result};
use crate::region::Region;

/// Correction bits for `targets`: rows 0..t give x′, rows t..2t give z′,
/// columns index the accumulated outcome vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassicalMap {
    pub targets: Region,
    pub matrix: BitMatrix,
}

impl ClassicalMap {
    pub fn apply(&self, y: &BitVec) -> Result<(Vec<bool>, Vec<bool>)> {
        if y.len() != self.matrix.cols() {
            return Err(MhError::Dimension(format!(
                "correction map expects {} outcome bits, got {}",
                self.matrix.cols(),
                y.len()
            )));
        }
        let v = self.matrix.mul_vec(y).to_bools();
        let t = self.targets.len();
        Ok((v[..t].to_vec(), v[t..].to_vec()))
    }
}

#[derive(Clone, Debug)]
pub struct Round {
    pub block: LayeredCircuit,
    pub measured: Region,
    pub correction: Option<ClassicalMap>,
}

#[derive(Clone, Debug)]
pub struct MeasurementProgram {
    pub n: usize,
    pub rounds: Vec<Round>,
    pub output: Region,
}

impl MeasurementProgram {
    pub fn total_measured(&self) -> usize {
        self.rounds.iter().map(|r| r.measured.len()).sum()
    }

    /// Number of layers of quantum gates over all rounds.
    pub fn quantum_depth(&self) -> usize {
        self.rounds.iter().map(|r| r.block.depth()).sum()
    }
}

#[derive(Clone, Debug)]
pub enum OutcomeSource {
    Seeded(u64),
    Forced(Vec<bool>),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Transcript {
    pub outcomes: Vec<bool>,
    pub probabilities: Vec<f64>,
    /// Per round: x′ followed by z′ for the round's targets.
    pub corrections: Vec<Vec<bool>>,
}

/// What a program runner needs from a simulator.
pub trait MeasurableState {
    fn num_qubits(&self) -> usize;
    fn apply(&mut self, g: &Gate) -> Result<()>;
    fn measure(&mut self, q: usize, forced: Option<bool>, rng: &mut ChaCha8Rng) -> Result<(bool, f64)>;
    fn pauli_x(&mut self, q: usize) -> Result<()>;
    fn pauli_z(&mut self, q: usize) -> Result<()>;
}

impl MeasurableState for StateVector {
    fn num_qubits(&self) -> usize {
        self.n()
    }
    fn apply(&mut self, g: &Gate) -> Result<()> {
        self.apply_gate(g)
    }
    fn measure(&mut self, q: usize, forced: Option<bool>, rng: &mut ChaCha8Rng) -> Result<(bool, f64)> {
        self.measure_z(q, forced, rng)
    }
    fn pauli_x(&mut self, q: usize) -> Result<()> {
        self.apply_gate(&Gate::x(q))
    }
    fn pauli_z(&mut self, q: usize) -> Result<()> {
        self.apply_gate(&Gate::z(q))
    }
}

impl MeasurableState for StabilizerSim {
    fn num_qubits(&self) -> usize {
        self.n()
    }
    fn apply(&mut self, g: &Gate) -> Result<()> {
        self.apply_gate(g)
    }
    fn measure(&mut self, q: usize, forced: Option<bool>, rng: &mut ChaCha8Rng) -> Result<(bool, f64)> {
        self.measure_z(q, forced, rng)
    }
    fn pauli_x(&mut self, q: usize) -> Result<()> {
        self.apply_x(q);
        Ok(())
    }
    fn pauli_z(&mut self, q: usize) -> Result<()> {
        self.apply_z(q);
        Ok(())
    }
}

struct Outcomes {
    rng: ChaCha8Rng,
    forced: Option<Vec<bool>>,
    next: usize,
}

impl Outcomes {
    fn new(src: &OutcomeSource) -> Self {
        match src {
            OutcomeSource::Seeded(s) => Outcomes { rng: ChaCha8Rng::seed_from_u64(*s), forced: None, next: 0 },
            OutcomeSource::Forced(v) => Outcomes { rng: ChaCha8Rng::seed_from_u64(0), forced: Some(v.clone()), next: 0 },
        }
    }

    fn measure<S: MeasurableState>(&mut self, s: &mut S, q: usize) -> Result<(bool, f64)> {
        let forced = match &self.forced {
            Some(v) => {
                let o = *v.get(self.next).ok_or_else(|| {
                    MhError::invalid(format!("forced outcome list has {} entries, more needed", v.len()))
                })?;
                self.next += 1;
                Some(o)
            }
            None => None,
        };
        s.measure(q, forced, &mut self.rng)
    }
}

/// Runs a program. MEASURE gates inside blocks record into the transcript
/// (and into the accumulated outcome vector); PARITY gates apply their Pauli
/// when the XOR of the latest outcomes on their control qubits is 1.
pub fn run_measurement_program<S: MeasurableState>(
    p: &MeasurementProgram,
    mut state: S,
    source: &OutcomeSource,
) -> Result<(S, Transcript)> {
    if state.num_qubits() != p.n {
        return Err(MhError::Dimension(format!("program on {} qubits, state on {}", p.n, state.num_qubits())));
    }
    let mut src = Outcomes::new(source);
    let mut tr = Transcript::default();
    let mut last: HashMap<usize, bool> = HashMap::new();
    for round in &p.rounds {
        if round.block.n() != p.n {
            return Err(MhError::Dimension("round block register differs from program".into()));
        }
        for layer in round.block.layers() {
            for g in layer {
                match &g.kind {
                    GateKind::MeasureZ { .. } => {
                        let (o, pr) = src.measure(&mut state, g.qubits[0])?;
                        last.insert(g.qubits[0], o);
                        tr.outcomes.push(o);
                        tr.probabilities.push(pr);
                    }
                    GateKind::ClassicalParity { pauli } => {
                        let mut par = false;
                        for q in &g.qubits[1..] {
                            par ^= *last.get(q).ok_or_else(|| {
                                MhError::invalid(format!("PARITY reads qubit {q} before it is measured"))
                            })?;
                        }
                        if par {
                            if *pauli == 'X' {
                                state.pauli_x(g.qubits[0])?;
                            } else {
                                state.pauli_z(g.qubits[0])?;
                            }
                        }
                    }
                    _ => state.apply(g)?,
                }
            }
        }
        for &q in round.measured.qubits() {
            let (o, pr) = src.measure(&mut state, q)?;
            last.insert(q, o);
            tr.outcomes.push(o);
            tr.probabilities.push(pr);
        }
        if let Some(map) = &round.correction {
            let y = BitVec::from_bools(&tr.outcomes);
            let (xs, zs) = map.apply(&y)?;
            for (i, &q) in map.targets.qubits().iter().enumerate() {
                if xs[i] {
                    state.pauli_x(q)?;
                }
                if zs[i] {
                    state.pauli_z(q)?;
                }
            }
            let mut rec = xs;
            rec.extend(zs);
            tr.corrections.push(rec);
        }
    }
    Ok((state, tr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{c, parse_circuit, C64};

    /// Single-qubit teleportation from qubit 0 to qubit 2.
    fn teleport_program() -> MeasurementProgram {
        let block = parse_circuit("QUBITS 3\nH 1\n/\nCNOT 1 2\n/\nCNOT 0 1\n/\nH 0").unwrap();
        // outcomes (m0, m1): X^{m1} Z^{m0} on qubit 2
        let mut m = BitMatrix::zeros(2, 2);
        m.set(0, 1, true);
        m.set(1, 0, true);
        MeasurementProgram {
            n: 3,
            rounds: vec![Round {
                block,
                measured: Region::new(vec![0, 1], 3).unwrap(),
                correction: Some(ClassicalMap { targets: Region::new(vec![2], 3).unwrap(), matrix: m }),
            }],
            output: Region::new(vec![2], 3).unwrap(),
        }
    }

    #[test]
    fn teleportation_gadget_all_outcomes() {
        let a: C64 = c(0.6, 0.0);
        let b: C64 = c(0.0, 0.8);
        let input = StateVector::from_amplitudes(vec![a, b]).unwrap();
        let full = input.tensor(&StateVector::zeros(2).unwrap()).unwrap();
        for o in 0..4 {
            let forced = vec![o & 1 == 1, o & 2 == 2];
            let (out, tr) = run_measurement_program(&teleport_program(), full.clone(), &OutcomeSource::Forced(forced)).unwrap();
            assert!(tr.probabilities.iter().all(|p| (p - 0.5).abs() < 1e-12));
            let rho = out.reduced_density(&Region::new(vec![2], 3).unwrap()).unwrap();
            assert!((rho[(0, 0)].re - 0.36).abs() < 1e-12);
            assert!((rho[(1, 0)] - b * a.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn seeded_runs_are_deterministic() {
        let input = StateVector::zeros(3).unwrap();
        let (_, t1) = run_measurement_program(&teleport_program(), input.clone(), &OutcomeSource::Seeded(11)).unwrap();
        let (_, t2) = run_measurement_program(&teleport_program(), input, &OutcomeSource::Seeded(11)).unwrap();
        assert_eq!(t1, t2);
    }
}
