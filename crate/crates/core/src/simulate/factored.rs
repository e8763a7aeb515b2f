//! Sparse simulator that keeps unentangled qubit groups apart.
//!
//! Each cluster stores its nonzero amplitudes keyed by a bitmask over the
//! cluster's own qubit list (at most 128 qubits per cluster). A gate merges
//! the clusters it touches; afterwards every touched qubit that is in a
//! definite basis state is split back out. This handles wide gadget circuits
//! whose entanglement stays within small groups.

use std::collections::HashMap;

use rand_chacha::ChaCha8Rng;
use rand::Rng;

use super::program::MeasurableState;
use super::statevector::StateVector;
use crate::circuit::{c, Gate, GateKind, LayeredCircuit, C64};
use crate::error::{MhError, Result};

const PRUNE: f64 = 1e-14;
pub const CLUSTER_CAP: usize = 128;
/// Nonzero amplitudes allowed in one cluster.
pub const TERM_CAP: usize = 1 << 22;

#[derive(Clone, Debug)]
struct Cluster {
    qubits: Vec<usize>,
    amps: HashMap<u128, C64>,
}

impl Cluster {
    fn single(q: usize, bit: bool) -> Self {
        let mut amps = HashMap::new();
        amps.insert(bit as u128, c(1.0, 0.0));
        Cluster { qubits: vec![q], amps }
    }

    fn pos(&self, q: usize) -> usize {
        self.qubits.iter().position(|&x| x == q).expect("qubit belongs to cluster")
    }

    /// Some(bit) when every term agrees on the qubit at position `i`.
    fn definite(&self, i: usize) -> Option<bool> {
        let mut it = self.amps.keys();
        let first = (it.next()? >> i) & 1;
        if it.all(|k| (k >> i) & 1 == first) {
            Some(first == 1)
        } else {
            None
        }
    }

    fn remove_position(&mut self, i: usize) {
        let low = (1u128 << i) - 1;
        let amps = std::mem::take(&mut self.amps);
        self.amps = amps
            .into_iter()
            .map(|(k, a)| {
                let hi = if i + 1 >= 128 { 0 } else { (k >> (i + 1)) << i };
                ((k & low) | hi, a)
            })
            .collect();
        self.qubits.remove(i);
    }
}

#[derive(Clone, Debug)]
pub struct FactoredState {
    n: usize,
    owner: Vec<usize>,
    clusters: Vec<Option<Cluster>>,
}

impl FactoredState {
    pub fn zeros(n: usize) -> Self {
        Self::from_bits(&vec![false; n])
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let n = bits.len();
        FactoredState {
            n,
            owner: (0..n).collect(),
            clusters: bits.iter().enumerate().map(|(q, &b)| Some(Cluster::single(q, b))).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn cluster(&self, q: usize) -> &Cluster {
        self.clusters[self.owner[q]].as_ref().expect("owner points at a live cluster")
    }

    /// Merges the clusters holding `qs` and returns the merged cluster id.
    fn merge(&mut self, qs: &[usize]) -> Result<usize> {
        let mut ids: Vec<usize> = qs.iter().map(|&q| self.owner[q]).collect();
        ids.sort_unstable();
        ids.dedup();
        let target = ids[0];
        let total: usize = ids.iter().map(|&i| self.clusters[i].as_ref().unwrap().qubits.len()).sum();
        if total > CLUSTER_CAP {
            return Err(MhError::cap(format!("entangled cluster of {total} qubits (cap {CLUSTER_CAP})")));
        }
        for &id in &ids[1..] {
            let other = self.clusters[id].take().unwrap();
            let base = self.clusters[target].as_mut().unwrap();
            let shift = base.qubits.len();
            let terms = base.amps.len() * other.amps.len();
            if terms > TERM_CAP {
                return Err(MhError::cap(format!("cluster with {terms} amplitudes")));
            }
            let mut amps = HashMap::with_capacity(terms);
            for (ka, aa) in &base.amps {
                for (kb, ab) in &other.amps {
                    amps.insert(ka | (kb << shift), aa * ab);
                }
            }
            base.amps = amps;
            for &q in &other.qubits {
                self.owner[q] = target;
            }
            base.qubits.extend(other.qubits);
        }
        Ok(target)
    }

    fn split_definite(&mut self, qs: &[usize]) {
        for &q in qs {
            let id = self.owner[q];
            let cl = self.clusters[id].as_mut().unwrap();
            if cl.qubits.len() == 1 {
                continue;
            }
            let i = cl.pos(q);
            if let Some(bit) = cl.definite(i) {
                cl.remove_position(i);
                let slot = self.clusters.len();
                self.clusters.push(Some(Cluster::single(q, bit)));
                self.owner[q] = slot;
            }
        }
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        for &q in &g.qubits {
            if q >= self.n {
                return Err(MhError::InvalidRegion(format!("qubit {q} out of range for n = {}", self.n)));
            }
        }
        if matches!(g.kind, GateKind::MeasureZ { .. } | GateKind::ClassicalParity { .. }) {
            return Err(MhError::GateClass(format!("{} is not unitary", g.kind.name())));
        }
        let id = self.merge(&g.qubits)?;
        let cl = self.clusters[id].as_mut().unwrap();
        let pos: Vec<usize> = g.qubits.iter().map(|&q| cl.pos(q)).collect();
        match &g.kind {
            GateKind::Fanout => {
                let src = pos[0];
                let tmask: u128 = pos[1..].iter().map(|&p| 1u128 << p).fold(0, |a, b| a | b);
                let amps = std::mem::take(&mut cl.amps);
                cl.amps = amps.into_iter().map(|(k, a)| if (k >> src) & 1 == 1 { (k ^ tmask, a) } else { (k, a) }).collect();
            }
            _ => {
                let m = g.matrix().expect("unitary gate has a matrix");
                let k = pos.len();
                let dim = 1usize << k;
                // local index: for two-qubit gates 2·b(q0) + b(q1)
                let local = |key: u128| -> usize {
                    if k == 1 {
                        ((key >> pos[0]) & 1) as usize
                    } else {
                        ((((key >> pos[0]) & 1) << 1) | ((key >> pos[1]) & 1)) as usize
                    }
                };
                let set_local = |key: u128, l: usize| -> u128 {
                    if k == 1 {
                        (key & !(1u128 << pos[0])) | ((l as u128 & 1) << pos[0])
                    } else {
                        let cleared = key & !(1u128 << pos[0]) & !(1u128 << pos[1]);
                        cleared | ((((l >> 1) & 1) as u128) << pos[0]) | (((l & 1) as u128) << pos[1])
                    }
                };
                let mut out: HashMap<u128, C64> = HashMap::with_capacity(cl.amps.len() * 2);
                for (&key, &a) in &cl.amps {
                    let l = local(key);
                    for r in 0..dim {
                        let v = m[r * dim + l];
                        if v.norm_sqr() == 0.0 {
                            continue;
                        }
                        *out.entry(set_local(key, r)).or_insert(c(0.0, 0.0)) += v * a;
                    }
                }
                out.retain(|_, a| a.norm() >= PRUNE);
                if out.len() > TERM_CAP {
                    return Err(MhError::cap(format!("cluster with {} amplitudes", out.len())));
                }
                cl.amps = out;
            }
        }
        let qs = g.qubits.clone();
        self.split_definite(&qs);
        Ok(())
    }

    pub fn run(&mut self, c: &LayeredCircuit) -> Result<()> {
        if c.n() != self.n {
            return Err(MhError::Dimension(format!("circuit on {} qubits, state on {}", c.n(), self.n)));
        }
        for g in c.gates() {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    pub fn prob_one(&self, q: usize) -> f64 {
        let cl = self.cluster(q);
        let i = cl.pos(q);
        cl.amps.iter().filter(|(k, _)| (*k >> i) & 1 == 1).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Probability that every qubit in `qs` reads 0.
    pub fn prob_all_zero(&self, qs: &[usize]) -> f64 {
        let mut by_cluster: HashMap<usize, u128> = HashMap::new();
        for &q in qs {
            let id = self.owner[q];
            let i = self.clusters[id].as_ref().unwrap().pos(q);
            *by_cluster.entry(id).or_insert(0) |= 1u128 << i;
        }
        by_cluster
            .iter()
            .map(|(&id, &mask)| {
                self.clusters[id].as_ref().unwrap().amps.iter().filter(|(k, _)| *k & mask == 0).map(|(_, a)| a.norm_sqr()).sum::<f64>()
            })
            .product()
    }

    /// Largest cluster size and amplitude count (diagnostics).
    pub fn largest_cluster(&self) -> (usize, usize) {
        self.clusters
            .iter()
            .flatten()
            .map(|c| (c.qubits.len(), c.amps.len()))
            .max()
            .unwrap_or((0, 0))
    }

    /// Dense amplitudes, for cross-checks (n ≤ 20).
    pub fn to_statevector(&self) -> Result<StateVector> {
        if self.n > 20 {
            return Err(MhError::cap(format!("dense view of {} qubits", self.n)));
        }
        let mut amps: HashMap<usize, C64> = HashMap::new();
        amps.insert(0, c(1.0, 0.0));
        for cl in self.clusters.iter().flatten() {
            let mut next = HashMap::new();
            for (&b, &a) in &amps {
                for (&k, &v) in &cl.amps {
                    let mut idx = b;
                    for (i, &q) in cl.qubits.iter().enumerate() {
                        if (k >> i) & 1 == 1 {
                            idx |= 1 << q;
                        }
                    }
                    next.insert(idx, a * v);
                }
            }
            amps = next;
        }
        let mut v = vec![c(0.0, 0.0); 1 << self.n];
        for (b, a) in amps {
            v[b] = a;
        }
        StateVector::normalized(v)
    }

    pub fn measure_z<R: Rng>(&mut self, q: usize, forced: Option<bool>, rng: &mut R) -> Result<(bool, f64)> {
        let p1 = self.prob_one(q).clamp(0.0, 1.0);
        let outcome = forced.unwrap_or_else(|| rng.random::<f64>() < p1);
        let p = if outcome { p1 } else { 1.0 - p1 };
        if p < 1e-12 {
            return Err(MhError::ImpossibleOutcome { qubit: q });
        }
        let id = self.owner[q];
        let cl = self.clusters[id].as_mut().unwrap();
        let i = cl.pos(q);
        let scale = 1.0 / p.sqrt();
        cl.amps.retain(|k, _| ((k >> i) & 1 == 1) == outcome);
        for a in cl.amps.values_mut() {
            *a *= scale;
        }
        self.split_definite(&[q]);
        Ok((outcome, p))
    }
}

impl MeasurableState for FactoredState {
    fn num_qubits(&self) -> usize {
        self.n
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;
    use crate::simulate::dense_run;

    #[test]
    fn agrees_with_dense_on_small_circuit() {
        let c = parse_circuit(
            "H 0\nH 2\n/\nFANOUT 0 1 3\n/\nT 1\nCZ 2 3\n/\nGENERIC1 0 0.6,0 0.8,0 0.8,0 -0.6,0\nCNOT 3 4\n/\nSWAP 1 4\nS 2",
        )
        .unwrap();
        let mut f = FactoredState::zeros(c.n());
        f.run(&c).unwrap();
        let d = dense_run(&c, &StateVector::zeros(c.n()).unwrap()).unwrap();
        assert!((f.to_statevector().unwrap().fidelity(&d) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn definite_qubits_are_split_off() {
        let c = parse_circuit("X 0 / CNOT 0 1 / CNOT 0 2").unwrap();
        let mut f = FactoredState::zeros(3);
        f.run(&c).unwrap();
        assert_eq!(f.largest_cluster().0, 1);
        assert!((f.prob_one(2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wide_product_circuit_is_cheap() {
        let n = 1000;
        let mut c = LayeredCircuit::new(n);
        c.push_layer((0..n).map(Gate::h).collect()).unwrap();
        c.push_layer((0..n).map(Gate::h).collect()).unwrap();
        let mut f = FactoredState::zeros(n);
        f.run(&c).unwrap();
        assert!((f.prob_all_zero(&(0..n).collect::<Vec<_>>()) - 1.0).abs() < 1e-9);
    }
}
