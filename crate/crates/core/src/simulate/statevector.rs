use rand::Rng;
use rayon::prelude::*;

use crate::circuit::{c, Gate, GateKind, LayeredCircuit, C64};
use crate::error::{MhError, Result};
use crate::linalg::{self, gather_bits, scatter_bits, CMat};
use crate::pauli::PauliString;
use crate::region::Region;

pub const DENSE_CAP: usize = 26;
/// Below this size gate application stays on the calling thread.
const PAR_THRESHOLD: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zeros(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if n > DENSE_CAP {
            return Err(MhError::cap(format!("dense state on {n} qubits (cap {DENSE_CAP})")));
        }
        if index >= 1 << n {
            return Err(MhError::invalid(format!("basis index {index} out of range for {n} qubits")));
        }
        let mut amps = vec![c(0.0, 0.0); 1 << n];
        amps[index] = c(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    /// Requires unit norm within 1e−10.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.len() != 1 << n || amps.is_empty() {
            return Err(MhError::Dimension(format!("{} amplitudes is not a power of two", amps.len())));
        }
        if n > DENSE_CAP {
            return Err(MhError::cap(format!("dense state on {n} qubits (cap {DENSE_CAP})")));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(MhError::invalid(format!("state norm {norm} differs from 1")));
        }
        Ok(StateVector { n, amps })
    }

    /// Normalizes a nonzero vector.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(MhError::invalid("zero vector"));
        }
        Self::from_amplitudes(amps.into_iter().map(|a| a / norm).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// self ⊗ other with `other` on the higher qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let n = self.n + other.n;
        if n > DENSE_CAP {
            return Err(MhError::cap(format!("dense state on {n} qubits")));
        }
        let mut amps = Vec::with_capacity(1 << n);
        for b in &other.amps {
            for a in &self.amps {
                amps.push(a * b);
            }
        }
        Ok(StateVector { n, amps })
    }

    fn check_qubits(&self, qs: &[usize]) -> Result<()> {
        for &q in qs {
            if q >= self.n {
                return Err(MhError::InvalidRegion(format!("qubit {q} out of range for n = {}", self.n)));
            }
        }
        Ok(())
    }

    pub fn apply_matrix1(&mut self, q: usize, m: &[C64]) -> Result<()> {
        self.check_qubits(&[q])?;
        let (m00, m01, m10, m11) = (m[0], m[1], m[2], m[3]);
        let half = 1usize << q;
        let kernel = |chunk: &mut [C64]| {
            let (lo, hi) = chunk.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = m00 * x + m01 * y;
                *b = m10 * x + m11 * y;
            }
        };
        if self.n >= PAR_THRESHOLD && q + 1 < self.n {
            self.amps.par_chunks_mut(half << 1).for_each(kernel);
        } else {
            self.amps.chunks_mut(half << 1).for_each(kernel);
        }
        Ok(())
    }

    /// Row-major 4×4 on (q0, q1), local index 2·b(q0) + b(q1).
    pub fn apply_matrix2(&mut self, q0: usize, q1: usize, m: &[C64]) -> Result<()> {
        self.check_qubits(&[q0, q1])?;
        if q0 == q1 {
            return Err(MhError::invalid("two-qubit gate on a repeated qubit"));
        }
        let (b0, b1) = (1usize << q0, 1usize << q1);
        let top = q0.max(q1);
        let kernel = |offset: usize, chunk: &mut [C64]| {
            for base in 0..chunk.len() {
                let g = base + offset;
                if g & (b0 | b1) != 0 {
                    continue;
                }
                let idx = [base, base | b1, base | b0, base | b0 | b1];
                let v = [chunk[idx[0]], chunk[idx[1]], chunk[idx[2]], chunk[idx[3]]];
                for r in 0..4 {
                    chunk[idx[r]] = m[4 * r] * v[0] + m[4 * r + 1] * v[1] + m[4 * r + 2] * v[2] + m[4 * r + 3] * v[3];
                }
            }
        };
        let size = 1usize << (top + 1);
        if self.n >= PAR_THRESHOLD && top + 1 < self.n {
            self.amps.par_chunks_mut(size).enumerate().for_each(|(i, ch)| kernel(i * size, ch));
        } else {
            let len = self.amps.len();
            kernel(0, &mut self.amps[..len]);
        }
        Ok(())
    }

    fn apply_fanout(&mut self, src: usize, targets: &[usize]) {
        let tmask: usize = targets.iter().map(|&t| 1usize << t).sum();
        let low = 1usize << targets.iter().copied().min().unwrap();
        for b in 0..self.amps.len() {
            if b & (1 << src) != 0 && b & low == 0 {
                self.amps.swap(b, b ^ tmask);
            }
        }
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        self.check_qubits(&g.qubits)?;
        match &g.kind {
            GateKind::Fanout => {
                self.apply_fanout(g.qubits[0], &g.qubits[1..]);
                Ok(())
            }
            GateKind::MeasureZ { .. } | GateKind::ClassicalParity { .. } => Err(MhError::GateClass(format!(
                "{} is not unitary; run it inside a measurement program",
                g.kind.name()
            ))),
            _ => {
                let m = g.matrix().expect("unitary gate has a matrix");
                if g.qubits.len() == 1 {
                    self.apply_matrix1(g.qubits[0], &m)
                } else {
                    self.apply_matrix2(g.qubits[0], g.qubits[1], &m)
                }
            }
        }
    }

    pub fn apply_layer(&mut self, layer: &[Gate]) -> Result<()> {
        for g in layer {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    pub fn run(&mut self, c: &LayeredCircuit) -> Result<()> {
        if c.n() != self.n {
            return Err(MhError::Dimension(format!("circuit on {} qubits, state on {}", c.n(), self.n)));
        }
        for layer in c.layers() {
            self.apply_layer(layer)?;
        }
        Ok(())
    }

    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        if p.n() != self.n {
            return Err(MhError::Dimension(format!("Pauli on {} qubits, state on {}", p.n(), self.n)));
        }
        let mut out = vec![c(0.0, 0.0); self.amps.len()];
        for (b, &a) in self.amps.iter().enumerate() {
            let (b2, coef) = p.act_on_basis(b as u64);
            out[b2 as usize] = coef * a;
        }
        self.amps = out;
        Ok(())
    }

    /// O|ψ⟩ for a dense operator on `region` (result is not normalized).
    pub fn apply_operator(&self, op: &CMat, region: &[usize]) -> Result<Vec<C64>> {
        self.check_qubits(region)?;
        let k = region.len();
        if op.nrows() != 1 << k || op.ncols() != 1 << k {
            return Err(MhError::Dimension(format!("operator is {}×{}, region has {k} qubits", op.nrows(), op.ncols())));
        }
        let mask: usize = region.iter().map(|&q| 1usize << q).sum();
        let mut out = vec![c(0.0, 0.0); self.amps.len()];
        for (b, &a) in self.amps.iter().enumerate() {
            if a == c(0.0, 0.0) {
                continue;
            }
            let lc = gather_bits(b, region);
            let rest = b & !mask;
            for lr in 0..(1usize << k) {
                let v = op[(lr, lc)];
                if v != c(0.0, 0.0) {
                    out[rest | scatter_bits(lr, region)] += v * a;
                }
            }
        }
        Ok(out)
    }

    pub fn expectation(&self, op: &CMat, region: &[usize]) -> Result<C64> {
        let v = self.apply_operator(op, region)?;
        Ok(self.amps.iter().zip(&v).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn expectation_pauli(&self, p: &PauliString) -> Result<f64> {
        let mut t = self.clone();
        t.apply_pauli(p)?;
        Ok(self.inner(&t).re)
    }

    pub fn reduced_density(&self, region: &Region) -> Result<CMat> {
        linalg::reduced_density_pure(&self.amps, self.n, region)
    }

    pub fn prob_one(&self, q: usize) -> f64 {
        self.amps.iter().enumerate().filter(|(b, _)| b & (1 << q) != 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Projective Z measurement; `forced` overrides Born sampling.
    pub fn measure_z<R: Rng>(&mut self, q: usize, forced: Option<bool>, rng: &mut R) -> Result<(bool, f64)> {
        self.check_qubits(&[q])?;
        let p1 = self.prob_one(q).clamp(0.0, 1.0);
        let outcome = match forced {
            Some(o) => o,
            None => rng.random::<f64>() < p1,
        };
        let p = if outcome { p1 } else { 1.0 - p1 };
        if p < 1e-12 {
            return Err(MhError::ImpossibleOutcome { qubit: q });
        }
        let scale = 1.0 / p.sqrt();
        for (b, a) in self.amps.iter_mut().enumerate() {
            if ((b >> q) & 1 == 1) == outcome {
                *a *= scale;
            } else {
                *a = c(0.0, 0.0);
            }
        }
        Ok((outcome, p))
    }

    /// Dense density matrix |ψ⟩⟨ψ| (n ≤ 13).
    pub fn density(&self) -> Result<CMat> {
        if self.n > 13 {
            return Err(MhError::cap(format!("dense density on {} qubits", self.n)));
        }
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        Ok(&v * v.adjoint())
    }
}

/// Exact layer-by-layer application of a unitary circuit.
pub fn dense_run(c: &LayeredCircuit, psi0: &StateVector) -> Result<StateVector> {
    if c.has_measurement() || c.gates().any(|g| matches!(g.kind, GateKind::ClassicalParity { .. })) {
        return Err(MhError::GateClass("measurement in a unitary-only simulation".into()));
    }
    let mut psi = psi0.clone();
    psi.run(c)?;
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn hadamard_on_first_qubit() {
        let psi = dense_run(&parse_circuit("QUBITS 2\nH 0").unwrap(), &StateVector::zeros(2).unwrap()).unwrap();
        let a = psi.amplitudes();
        assert!((a[0] - c(S, 0.0)).norm() < 1e-12 && (a[1] - c(S, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn bell_prep() {
        let psi = dense_run(&parse_circuit("H 0 / CNOT 0 1").unwrap(), &StateVector::zeros(2).unwrap()).unwrap();
        let a = psi.amplitudes();
        assert!((a[0] - c(S, 0.0)).norm() < 1e-12 && (a[3] - c(S, 0.0)).norm() < 1e-12);
        assert!((psi.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fanout_matches_cnot_chain() {
        let a = dense_run(&parse_circuit("H 0 / FANOUT 0 1 2 3").unwrap(), &StateVector::zeros(4).unwrap()).unwrap();
        let b = dense_run(
            &parse_circuit("H 0 / CNOT 0 1 / CNOT 0 2 / CNOT 0 3").unwrap(),
            &StateVector::zeros(4).unwrap(),
        )
        .unwrap();
        assert!((a.fidelity(&b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn measurement_program_forced_outcome() {
        let mut psi = dense_run(&parse_circuit("H 0").unwrap(), &StateVector::zeros(1).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (o, p) = psi.measure_z(0, Some(false), &mut rng).unwrap();
        assert!(!o && (p - 0.5).abs() < 1e-12);
        assert!((psi.amplitudes()[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(matches!(psi.measure_z(0, Some(true), &mut rng), Err(MhError::ImpossibleOutcome { qubit: 0 })));
    }

    #[test]
    fn measurement_rejected_in_unitary_path() {
        let c = parse_circuit("MEASURE 0").unwrap();
        assert!(dense_run(&c, &StateVector::zeros(1).unwrap()).is_err());
    }
}
