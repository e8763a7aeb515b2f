//! Backward and forward lightcones of layered circuits.
//!
//! Every gate (FANOUT and MEASURE included) links all of its qubits.
//!
//! Blowup: B is the least integer with |back(S)|, |fwd(S)| ≤ B·|S| for every
//! S. Since back(S) = ∪_{i∈S} back(i), |back(S)| ≤ Σ|back(i)| ≤ |S|·max_i|back(i)|,
//! and S = {i} shows the singleton maximum is needed; so B is that maximum.

use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::LayeredCircuit;
use crate::error::Result;
use crate::region::Region;

fn sweep<'a, I: Iterator<Item = &'a Vec<crate::circuit::Gate>>>(layers: I, n: usize, s: &Region) -> Vec<bool> {
    let mut mark = s.mask(n);
    for layer in layers {
        for g in layer {
            if g.qubits.iter().any(|&q| mark[q]) {
                for &q in &g.qubits {
                    mark[q] = true;
                }
            }
        }
    }
    mark
}

/// Input qubits with a wire path to some output in `s`.
pub fn back_lightcone(c: &LayeredCircuit, s: &Region) -> Result<Region> {
    s.check(c.n())?;
    Ok(Region::from_mask(&sweep(c.layers().iter().rev(), c.n(), s)))
}

/// Output qubits reachable from inputs in `s`.
pub fn forward_lightcone(c: &LayeredCircuit, s: &Region) -> Result<Region> {
    s.check(c.n())?;
    Ok(Region::from_mask(&sweep(c.layers().iter(), c.n(), s)))
}

pub fn blowup(c: &LayeredCircuit) -> usize {
    LightconeIndex::new(c).blowup
}

#[derive(Clone, Debug, Serialize)]
pub struct LightconeIndex {
    pub back: Vec<Region>,
    pub forward: Vec<Region>,
    pub blowup: usize,
}

impl LightconeIndex {
    pub fn new(c: &LayeredCircuit) -> Self {
        let n = c.n();
        let cones: Vec<(Region, Region)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let s = Region::from_iter_unchecked([i]);
                (
                    Region::from_mask(&sweep(c.layers().iter().rev(), n, &s)),
                    Region::from_mask(&sweep(c.layers().iter(), n, &s)),
                )
            })
            .collect();
        let blowup = cones.iter().map(|(b, f)| b.len().max(f.len())).max().unwrap_or(1).max(1);
        let (back, forward) = cones.into_iter().unzip();
        LightconeIndex { back, forward, blowup }
    }

    pub fn back_of(&self, s: &Region) -> Region {
        s.iter().fold(Region::empty(), |acc, &i| acc.union(&self.back[i]))
    }

    pub fn forward_of(&self, s: &Region) -> Region {
        s.iter().fold(Region::empty(), |acc, &i| acc.union(&self.forward[i]))
    }
}

/// Gates on some path from back(S) to S, relabeled onto back(S).
#[derive(Clone, Debug)]
pub struct InducedCircuit {
    /// back(S) in the original numbering; qubit k of `circuit` is `qubits[k]`.
    pub qubits: Region,
    pub circuit: LayeredCircuit,
}

impl InducedCircuit {
    /// Positions of `s` inside the relabeled register.
    pub fn local(&self, s: &Region) -> Vec<usize> {
        s.iter().map(|&q| self.qubits.position(q).expect("region inside its cone")).collect()
    }
}

pub fn induced_subcircuit(c: &LayeredCircuit, s: &Region) -> Result<InducedCircuit> {
    s.check(c.n())?;
    let n = c.n();
    let mut mark = s.mask(n);
    let mut kept: Vec<Vec<crate::circuit::Gate>> = Vec::with_capacity(c.depth());
    for layer in c.layers().iter().rev() {
        let mut l = Vec::new();
        for g in layer {
            if g.qubits.iter().any(|&q| mark[q]) {
                for &q in &g.qubits {
                    mark[q] = true;
                }
                l.push(g.clone());
            }
        }
        kept.push(l);
    }
    kept.reverse();
    let qubits = Region::from_mask(&mark);
    let mut map = vec![usize::MAX; n];
    for (k, &q) in qubits.iter().enumerate() {
        map[q] = k;
    }
    let mut out = LayeredCircuit::new(qubits.len());
    for l in kept.into_iter().filter(|l| !l.is_empty()) {
        let relabeled = l
            .into_iter()
            .map(|g| crate::circuit::Gate { kind: g.kind, qubits: g.qubits.iter().map(|&q| map[q]).collect() })
            .collect();
        out.push_layer(relabeled)?;
    }
    Ok(InducedCircuit { qubits, circuit: out })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DoubleCone {
    /// back(fwd(i))
    BackOfForward,
    /// fwd(back(i))
    ForwardOfBack,
}

impl DoubleCone {
    pub fn of(&self, idx: &LightconeIndex, i: usize) -> Region {
        let s = Region::from_iter_unchecked([i]);
        match self {
            DoubleCone::BackOfForward => idx.back_of(&idx.forward_of(&s)),
            DoubleCone::ForwardOfBack => idx.forward_of(&idx.back_of(&s)),
        }
    }
}

/// First pair (i, j), i < j, in lexicographic order whose double cones are disjoint.
pub fn find_disjoint_pair(c: &LayeredCircuit, candidates: &Region, mode: DoubleCone) -> Result<Option<(usize, usize)>> {
    candidates.check(c.n())?;
    let idx = LightconeIndex::new(c);
    let cones: Vec<Region> = candidates.iter().map(|&i| mode.of(&idx, i)).collect();
    let q = candidates.qubits();
    for a in 0..q.len() {
        for b in a + 1..q.len() {
            if cones[a].is_disjoint(&cones[b]) {
                return Ok(Some((q[a], q[b])));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{parse_circuit, Gate};

    fn r(v: &[usize], n: usize) -> Region {
        Region::new(v.to_vec(), n).unwrap()
    }

    #[test]
    fn cone_examples() {
        let id = LayeredCircuit::new(5);
        assert_eq!(back_lightcone(&id, &r(&[3], 5)).unwrap(), r(&[3], 5));
        assert_eq!(blowup(&id), 1);
        let cx = parse_circuit("CNOT 0 1").unwrap();
        assert_eq!(back_lightcone(&cx, &r(&[1], 2)).unwrap(), r(&[0, 1], 2));
        assert_eq!(forward_lightcone(&cx, &r(&[0], 2)).unwrap(), r(&[0, 1], 2));
        let layer = parse_circuit("CNOT 0 1\nCNOT 2 3\nCNOT 4 5").unwrap();
        assert_eq!(blowup(&layer), 2);
    }

    #[test]
    fn induced_examples() {
        let c = parse_circuit("QUBITS 3\nH 0 / CNOT 0 1").unwrap();
        let ind = induced_subcircuit(&c, &r(&[2], 3)).unwrap();
        assert_eq!(ind.circuit.gate_count(), 0);
        let ind = induced_subcircuit(&c, &r(&[1], 3)).unwrap();
        assert_eq!(ind.circuit.gate_count(), 2);
        assert_eq!(ind.qubits, r(&[0, 1], 3));
    }

    #[test]
    fn identity_pair_search() {
        let c = LayeredCircuit::new(6);
        let p = find_disjoint_pair(&c, &Region::full(6), DoubleCone::ForwardOfBack).unwrap();
        assert_eq!(p, Some((0, 1)));
        let mut full = LayeredCircuit::new(4);
        full.push_layer(vec![Gate::fanout(0, &[1, 2, 3])]).unwrap();
        assert_eq!(find_disjoint_pair(&full, &Region::full(4), DoubleCone::BackOfForward).unwrap(), None);
    }
}
