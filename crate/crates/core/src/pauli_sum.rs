//! Linear combinations of Pauli strings and their Heisenberg evolution.

use std::collections::HashMap;

use serde::Serialize;

use crate::circuit::{c, Gate, GateKind, LayeredCircuit, C64};
use crate::error::{MhError, Result};
use crate::linalg::CMat;
use crate::pauli::{i_pow, local_pauli, local_pauli_index, PauliString};
use crate::region::Region;
use crate::stabilizer::{conjugate_pauli, conjugate_pauli_adjoint};

pub const DROP_TOL: f64 = 1e-10;
pub const TERM_CAP: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// O ↦ U O U†, gates in circuit order.
    Forward,
    /// O ↦ U† O U, gates in reverse order.
    Backward,
}

/// Σ c_P P with keys stored at phase 0.
#[derive(Clone, Debug)]
pub struct PauliSum {
    n: usize,
    terms: HashMap<PauliString, C64>,
}

impl PauliSum {
    pub fn zero(n: usize) -> Self {
        PauliSum { n, terms: HashMap::new() }
    }

    pub fn from_pauli(p: &PauliString) -> Self {
        let mut s = PauliSum::zero(p.n());
        s.add(p, c(1.0, 0.0));
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &C64)> {
        self.terms.iter()
    }

    /// Adds coef·p (the phase of p is folded into the coefficient).
    pub fn add(&mut self, p: &PauliString, coef: C64) {
        let mut key = p.clone();
        let coef = coef * i_pow(p.phase());
        key.set_phase(0);
        *self.terms.entry(key).or_insert(c(0.0, 0.0)) += coef;
    }

    pub fn prune(&mut self, tol: f64) {
        self.terms.retain(|_, v| v.norm() >= tol);
    }

    /// Pauli expansion of a dense operator on `region` of an n-qubit register.
    pub fn from_dense(op: &CMat, region: &Region, n: usize) -> Result<Self> {
        let k = region.len();
        if op.nrows() != 1 << k || op.ncols() != 1 << k {
            return Err(MhError::Dimension(format!("operator is {}×{}, region has {k} qubits", op.nrows(), op.ncols())));
        }
        let mut s = PauliSum::zero(n);
        for idx in 0..(1usize << (2 * k)) {
            let p = local_pauli(k, idx);
            let coef = (p.to_dense()? * op).trace() / c((1usize << k) as f64, 0.0);
            if coef.norm() >= DROP_TOL {
                s.add(&p.embed(n, region.qubits()), coef);
            }
        }
        Ok(s)
    }

    pub fn apply_gate(&mut self, g: &Gate, dir: Direction) -> Result<()> {
        match &g.kind {
            GateKind::T | GateKind::Generic1(_) | GateKind::Generic2(_) => self.apply_local(g, dir),
            GateKind::MeasureZ { .. } | GateKind::ClassicalParity { .. } => {
                Err(MhError::GateClass(format!("{} has no Heisenberg action on observables", g.kind.name())))
            }
            _ => {
                let old = std::mem::take(&mut self.terms);
                for (mut p, v) in old {
                    match dir {
                        Direction::Forward => conjugate_pauli(&mut p, g)?,
                        Direction::Backward => conjugate_pauli_adjoint(&mut p, g)?,
                    }
                    self.add(&p, v);
                }
                Ok(())
            }
        }
    }

    fn apply_local(&mut self, g: &Gate, dir: Direction) -> Result<()> {
        let u = CMat::from_row_slice(1 << g.qubits.len(), 1 << g.qubits.len(), &g.matrix().expect("unitary"));
        // Local qubit 0 is the low bit of the gate's basis index.
        let pos: Vec<usize> = g.qubits.iter().rev().copied().collect();
        let k = pos.len();
        let table: Vec<Vec<(usize, C64)>> = (0..1usize << (2 * k))
            .map(|idx| {
                let p = local_pauli(k, idx).to_dense().expect("small");
                let m = match dir {
                    Direction::Forward => &u * p * u.adjoint(),
                    Direction::Backward => u.adjoint() * p * &u,
                };
                (0..1usize << (2 * k))
                    .filter_map(|j| {
                        let q = local_pauli(k, j).to_dense().expect("small");
                        let coef = (q * &m).trace() / c((1usize << k) as f64, 0.0);
                        (coef.norm() >= 1e-14).then_some((j, coef))
                    })
                    .collect()
            })
            .collect();
        let old = std::mem::take(&mut self.terms);
        for (p, v) in old {
            let mut loc = PauliString::identity(k);
            for (i, &q) in pos.iter().enumerate() {
                loc.set_bits(i, p.x(q), p.z(q));
            }
            let idx = local_pauli_index(&loc);
            for &(j, coef) in &table[idx] {
                let lq = local_pauli(k, j);
                let mut out = p.clone();
                for (i, &q) in pos.iter().enumerate() {
                    out.set_bits(q, lq.x(i), lq.z(i));
                }
                self.add(&out, v * coef);
            }
            if self.terms.len() > TERM_CAP {
                return Err(MhError::cap(format!("Pauli expansion above {TERM_CAP} terms")));
            }
        }
        self.prune(DROP_TOL);
        Ok(())
    }

    pub fn evolve(&mut self, circuit: &LayeredCircuit, dir: Direction) -> Result<()> {
        if circuit.n() != self.n {
            return Err(MhError::Dimension(format!("circuit on {} qubits, observable on {}", circuit.n(), self.n)));
        }
        match dir {
            Direction::Forward => {
                for g in circuit.gates() {
                    self.apply_gate(g, dir)?;
                }
            }
            Direction::Backward => {
                for layer in circuit.layers().iter().rev() {
                    for g in layer {
                        self.apply_gate(g, dir)?;
                    }
                }
            }
        }
        self.prune(DROP_TOL);
        Ok(())
    }
}

/// Number of Pauli terms of the evolved single-qubit observable `o`.
pub fn pauli_spread(circuit: &LayeredCircuit, o: &PauliString, dir: Direction) -> Result<usize> {
    let mut s = PauliSum::from_pauli(o);
    s.evolve(circuit, dir)?;
    Ok(s.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;

    #[test]
    fn identity_keeps_one_term() {
        let c = LayeredCircuit::new(3);
        assert_eq!(pauli_spread(&c, &"XII".parse().unwrap(), Direction::Forward).unwrap(), 1);
    }

    #[test]
    fn t_maps_x_to_two_terms() {
        let c = parse_circuit("T 0").unwrap();
        let mut s = PauliSum::from_pauli(&"X".parse().unwrap());
        s.evolve(&c, Direction::Forward).unwrap();
        assert_eq!(s.len(), 2);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (p, v) in s.terms() {
            assert!((v.norm() - h).abs() < 1e-12, "{p} {v}");
        }
    }

    #[test]
    fn fanout_then_t_layer_gives_two_to_the_n() {
        let n = 6;
        let mut text = String::from("FANOUT 0 1 2 3 4 5\n/\n");
        for q in 0..n {
            text.push_str(&format!("T {q}\n"));
        }
        let c = parse_circuit(&text).unwrap();
        let x0: PauliString = "XIIIII".parse().unwrap();
        assert_eq!(pauli_spread(&c, &x0, Direction::Forward).unwrap(), 1 << n);
    }

    #[test]
    fn dense_roundtrip_of_two_qubit_generic() {
        let g = "GENERIC2 0 1 1,0 0,0 0,0 0,0 0,0 0.6,0 0.8,0 0,0 0,0 -0.8,0 0.6,0 0,0 0,0 0,0 0,0 0,1";
        let c = parse_circuit(&format!("QUBITS 3\n{g}")).unwrap();
        for dir in [Direction::Forward, Direction::Backward] {
            let p: PauliString = "ZXI".parse().unwrap();
            let mut s = PauliSum::from_pauli(&p);
            s.evolve(&c, dir).unwrap();
            let mut dense = CMat::zeros(8, 8);
            for (q, v) in s.terms() {
                dense += q.to_dense().unwrap() * *v;
            }
            let u = crate::linalg::embed_operator(
                &CMat::from_row_slice(4, 4, &c.layers()[0][0].matrix().unwrap()),
                &[1, 0],
                3,
            )
            .unwrap();
            let expect = match dir {
                Direction::Forward => &u * p.to_dense().unwrap() * u.adjoint(),
                Direction::Backward => u.adjoint() * p.to_dense().unwrap() * &u,
            };
            assert!((dense - expect).norm() < 1e-10);
        }
    }
}
