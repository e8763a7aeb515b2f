//! Seeded random instances: Clifford circuits, stabilizer states, Haar
//! unitaries and brickwork constant-depth circuits.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::circuit::{c, Gate, LayeredCircuit, C64};
use crate::simulate::StateVector;
use crate::stabilizer::StabilizerTableau;

/// One layer of random Clifford gates: a random matching of CNOT/CZ pairs
/// with H/S/identity on the leftovers.
pub fn random_clifford_layer<R: Rng>(n: usize, rng: &mut R) -> Vec<Gate> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut layer = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n && rng.random_bool(0.5) {
            let (a, b) = (order[i], order[i + 1]);
            layer.push(if rng.random_bool(0.5) { Gate::cnot(a, b) } else { Gate::cz(a, b) });
            i += 2;
        } else {
            match rng.random_range(0..3) {
                0 => layer.push(Gate::h(order[i])),
                1 => layer.push(Gate::s(order[i])),
                _ => {}
            }
            i += 1;
        }
    }
    layer
}

pub fn random_clifford_circuit<R: Rng>(n: usize, depth: usize, rng: &mut R) -> LayeredCircuit {
    let mut c = LayeredCircuit::new(n);
    for _ in 0..depth {
        c.push_layer(random_clifford_layer(n, rng)).expect("matching layers are disjoint");
    }
    c
}

/// Output of a random Clifford circuit of depth 2n + 4 on |0ⁿ⟩.
pub fn random_stabilizer_state<R: Rng>(n: usize, rng: &mut R) -> StabilizerTableau {
    StabilizerTableau::from_circuit(&random_clifford_circuit(n, 2 * n + 4, rng)).expect("Clifford circuit")
}

/// Random mixed stabilizer state: a pure one with `drop` generators removed.
pub fn random_mixed_stabilizer<R: Rng>(n: usize, drop: usize, rng: &mut R) -> StabilizerTableau {
    let t = random_stabilizer_state(n, rng);
    let mut gens = t.generators().to_vec();
    gens.shuffle(rng);
    gens.truncate(n.saturating_sub(drop));
    StabilizerTableau::canonicalize(n, &gens).expect("subset of a valid group")
}

/// Haar-random pure state (normalized complex Gaussian vector).
pub fn random_state<R: Rng>(n: usize, rng: &mut R) -> StateVector {
    let amps = (0..1usize << n).map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    StateVector::normalized(amps).expect("nonzero Gaussian vector")
}

/// (G + G†)/2 for a complex Gaussian d×d matrix G.
pub fn random_hermitian<R: Rng>(d: usize, rng: &mut R) -> DMatrix<C64> {
    let g = DMatrix::from_fn(d, d, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    (&g + g.adjoint()) * c(0.5, 0.0)
}

/// Haar-random d×d unitary (QR of a Ginibre matrix with phases fixed).
pub fn haar_unitary<R: Rng>(d: usize, rng: &mut R) -> DMatrix<C64> {
    let z = DMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    });
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rj = r[(j, j)];
        let ph = if rj.norm() > 0.0 { rj / rj.norm() } else { c(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= ph;
        }
    }
    q
}

fn row_major<const K: usize>(m: &DMatrix<C64>) -> [C64; K] {
    let d = m.nrows();
    std::array::from_fn(|k| m[(k / d, k % d)])
}

pub fn haar_1q<R: Rng>(q: usize, rng: &mut R) -> Gate {
    Gate::generic1(q, row_major::<4>(&haar_unitary(2, rng)))
}

pub fn haar_2q<R: Rng>(q0: usize, q1: usize, rng: &mut R) -> Gate {
    Gate::generic2(q0, q1, row_major::<16>(&haar_unitary(4, rng)))
}

/// Brickwork of Haar two-qubit gates on neighbours (offset alternates per layer).
pub fn brickwork<R: Rng>(n: usize, depth: usize, rng: &mut R) -> LayeredCircuit {
    let mut c = LayeredCircuit::new(n);
    for d in 0..depth {
        let layer = (d % 2..n.saturating_sub(1)).step_by(2).map(|i| haar_2q(i, i + 1, rng)).collect();
        c.push_layer(layer).expect("brick layers are disjoint");
    }
    c
}

/// Layer of Haar single-qubit gates on every qubit.
pub fn haar_1q_layer<R: Rng>(n: usize, rng: &mut R) -> Vec<Gate> {
    (0..n).map(|q| haar_1q(q, rng)).collect()
}

/// Constant-depth layers mixing Haar 1q gates and random-pair Haar 2q gates.
pub fn random_qnc0<R: Rng>(n: usize, depth: usize, rng: &mut R) -> LayeredCircuit {
    let mut c = LayeredCircuit::new(n);
    for _ in 0..depth {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut layer = Vec::new();
        let mut i = 0;
        while i < n {
            if i + 1 < n && rng.random_bool(0.5) {
                layer.push(haar_2q(order[i], order[i + 1], rng));
                i += 2;
            } else {
                layer.push(haar_1q(order[i], rng));
                i += 1;
            }
        }
        c.push_layer(layer).expect("disjoint");
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::check_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_samples_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let u = haar_unitary(4, &mut rng);
            check_unitary(&row_major::<16>(&u), 4).unwrap();
        }
    }

    #[test]
    fn random_states_are_pure_and_seeded() {
        let a = random_stabilizer_state(7, &mut ChaCha8Rng::seed_from_u64(1));
        let b = random_stabilizer_state(7, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(a.is_pure());
        assert_eq!(a, b);
        assert_eq!(random_mixed_stabilizer(7, 2, &mut ChaCha8Rng::seed_from_u64(1)).rank(), 5);
    }
}
