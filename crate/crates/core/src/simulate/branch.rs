//! Sparse simulator over computational-basis branches with arbitrary-width
//! keys. Permutation and diagonal gates update branches in place; only
//! non-diagonal single- and two-qubit gates rehash. Suited to wide circuits
//! on classical inputs where few qubits are ever in superposition.

use std::collections::HashMap;

use super::statevector::{StateVector, DENSE_CAP};
use crate::bits::BitVec;
use crate::circuit::{c, Gate, GateKind, LayeredCircuit, C64};
use crate::error::{MhError, Result};

const PRUNE: f64 = 1e-14;
/// Branch count at which the simulation gives up.
pub const BRANCH_CAP: usize = 1 << 20;

#[derive(Clone, Debug)]
pub struct BranchState {
    n: usize,
    branches: Vec<(BitVec, C64)>,
}

impl BranchState {
    pub fn zeros(n: usize) -> Self {
        BranchState { n, branches: vec![(BitVec::zeros(n), c(1.0, 0.0))] }
    }

    pub fn from_bits(bits: &BitVec) -> Self {
        BranchState { n: bits.len(), branches: vec![(bits.clone(), c(1.0, 0.0))] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn branches(&self) -> &[(BitVec, C64)] {
        &self.branches
    }

    pub fn amplitude(&self, bits: &BitVec) -> C64 {
        self.branches.iter().filter(|(b, _)| b == bits).map(|(_, a)| *a).sum()
    }

    pub fn prob_one(&self, q: usize) -> f64 {
        self.branches.iter().filter(|(b, _)| b.get(q)).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Probability that every qubit in `qs` reads 0.
    pub fn prob_all_zero(&self, qs: &[usize]) -> f64 {
        self.branches.iter().filter(|(b, _)| qs.iter().all(|&q| !b.get(q))).map(|(_, a)| a.norm_sqr()).sum()
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        for &q in &g.qubits {
            if q >= self.n {
                return Err(MhError::InvalidRegion(format!("qubit {q} out of range for n = {}", self.n)));
            }
        }
        let q = &g.qubits;
        match &g.kind {
            GateKind::X => self.branches.iter_mut().for_each(|(b, _)| b.flip(q[0])),
            GateKind::Cnot => {
                for (b, _) in self.branches.iter_mut() {
                    if b.get(q[0]) {
                        b.flip(q[1]);
                    }
                }
            }
            GateKind::Fanout => {
                for (b, _) in self.branches.iter_mut() {
                    if b.get(q[0]) {
                        for &t in &q[1..] {
                            b.flip(t);
                        }
                    }
                }
            }
            GateKind::Swap => {
                for (b, _) in self.branches.iter_mut() {
                    let (u, v) = (b.get(q[0]), b.get(q[1]));
                    b.set(q[0], v);
                    b.set(q[1], u);
                }
            }
            GateKind::Cz => {
                for (b, a) in self.branches.iter_mut() {
                    if b.get(q[0]) && b.get(q[1]) {
                        *a = -*a;
                    }
                }
            }
            GateKind::MeasureZ { .. } | GateKind::ClassicalParity { .. } => {
                return Err(MhError::GateClass(format!("{} is not unitary", g.kind.name())));
            }
            _ => {
                let m = g.matrix().expect("unitary gate has a matrix");
                self.apply_local(q, &m)?;
            }
        }
        Ok(())
    }

    fn apply_local(&mut self, q: &[usize], m: &[C64]) -> Result<()> {
        let d = 1usize << q.len();
        let local = |b: &BitVec| -> usize {
            // first listed qubit is the high bit of the row-major index
            q.iter().fold(0usize, |acc, &x| (acc << 1) | b.get(x) as usize)
        };
        let diagonal = (0..d).all(|r| (0..d).all(|s| r == s || m[r * d + s].norm() == 0.0));
        if diagonal {
            for (b, a) in self.branches.iter_mut() {
                let i = local(b);
                *a *= m[i * d + i];
            }
            self.branches.retain(|(_, a)| a.norm() > PRUNE);
            return Ok(());
        }
        let mut next: HashMap<BitVec, C64> = HashMap::with_capacity(self.branches.len() * 2);
        for (b, a) in self.branches.drain(..) {
            let i = local(&b);
            for r in 0..d {
                let w = m[r * d + i];
                if w.norm() == 0.0 {
                    continue;
                }
                let mut nb = b.clone();
                for (k, &x) in q.iter().enumerate() {
                    nb.set(x, (r >> (q.len() - 1 - k)) & 1 == 1);
                }
                *next.entry(nb).or_insert(c(0.0, 0.0)) += a * w;
            }
        }
        if next.len() > BRANCH_CAP {
            return Err(MhError::cap(format!("branch simulation exceeds {BRANCH_CAP} branches")));
        }
        self.branches = next.into_iter().filter(|(_, a)| a.norm() > PRUNE).collect();
        Ok(())
    }

    pub fn run(&mut self, circ: &LayeredCircuit) -> Result<()> {
        if circ.n() != self.n {
            return Err(MhError::Dimension(format!("circuit on {} qubits, state on {}", circ.n(), self.n)));
        }
        for g in circ.gates() {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    pub fn to_statevector(&self) -> Result<StateVector> {
        if self.n > DENSE_CAP {
            return Err(MhError::cap(format!("{} qubits exceed the dense cap {DENSE_CAP}", self.n)));
        }
        let mut amps = vec![c(0.0, 0.0); 1usize << self.n];
        for (b, a) in &self.branches {
            let idx = (0..self.n).fold(0usize, |acc, i| acc | ((b.get(i) as usize) << i));
            amps[idx] += *a;
        }
        StateVector::normalized(amps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_qnc0;
    use crate::simulate::dense_run;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_dense_on_random_shallow_circuits() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let circ = random_qnc0(5, 3, &mut rng);
            let mut b = BranchState::zeros(5);
            b.run(&circ).unwrap();
            let d = dense_run(&circ, &StateVector::zeros(5).unwrap()).unwrap();
            assert!(b.to_statevector().unwrap().fidelity(&d) > 1.0 - 1e-10);
        }
    }

    #[test]
    fn fanout_and_swap_permute() {
        let mut b = BranchState::from_bits(&BitVec::from_bools(&[true, false, false, false]));
        b.apply_gate(&Gate::fanout(0, &[2, 3])).unwrap();
        b.apply_gate(&Gate::swap(0, 1)).unwrap();
        assert_eq!(b.branches()[0].0.to_bools(), vec![false, true, true, true]);
    }
}
