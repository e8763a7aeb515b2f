//! Local expectation values of q·cl|0ⁿ⟩ with cl Clifford and q shallow.
//!
//! Only back_q(S) matters: ⟨O⟩ = tr(O · q_L ρ_L q_L†) with ρ_L the stabilizer
//! reduced state of cl|0ⁿ⟩ on L = back_q(S) and q_L the induced circuit.
//! ρ_L = 2^{−k} Σ_s |ψ_s⟩⟨ψ_s|, where the ψ_s are the pure stabilizer states
//! obtained by fixing signs of k logical Z operators of S_L. When that
//! mixture is too wide, O is pulled back through q_L as a Pauli sum instead
//! and each term is read off S_L (±1 if ±P ∈ S_L, else 0).

use rayon::prelude::*;
use serde::Serialize;

use super::statevector::StateVector;
use crate::circuit::LayeredCircuit;
use crate::error::{MhError, Result};
use crate::lightcone::induced_subcircuit;
use crate::linalg::{is_hermitian, CMat};
use crate::pauli_sum::{Direction, PauliSum};
use crate::region::Region;
use crate::stabilizer::StabilizerTableau;

pub const CONE_CAP: usize = 20;
/// Largest |L| + k for the state mixture.
const MIXTURE_CAP: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorPath {
    Mixture,
    Heisenberg,
}

#[derive(Clone, Debug, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub cone: usize,
    /// Number of logical qubits of S_L left unfixed.
    pub mixed: usize,
    pub path: EstimatorPath,
}

/// ⟨O⟩ on q·cl|0ⁿ⟩ for Hermitian `op` acting on `s` (bit i of the local index ↔ i-th qubit of `s`).
pub fn estimate_local_observable_a1cq(cl: &LayeredCircuit, q: &LayeredCircuit, op: &CMat, s: &Region) -> Result<Estimate> {
    if cl.n() != q.n() {
        return Err(MhError::Dimension(format!("Clifford part on {} qubits, QNC0 part on {}", cl.n(), q.n())));
    }
    s.check(q.n())?;
    if op.nrows() != 1 << s.len() || op.ncols() != 1 << s.len() {
        return Err(MhError::Dimension(format!("observable is {}×{}, region has {} qubits", op.nrows(), op.ncols(), s.len())));
    }
    if !is_hermitian(op, 1e-10) {
        return Err(MhError::invalid("observable is not Hermitian"));
    }
    if q.has_measurement() {
        return Err(MhError::GateClass("QNC0 part contains measurements".into()));
    }
    let induced = induced_subcircuit(q, s)?;
    let m = induced.qubits.len();
    if m > CONE_CAP {
        return Err(MhError::cap(format!("back lightcone has {m} qubits (cap {CONE_CAP})")));
    }
    let sl = StabilizerTableau::from_circuit(cl)?.restrict(&induced.qubits)?;
    let k = m - sl.rank();
    let local = induced.local(s);
    if m + k <= MIXTURE_CAP {
        let logical = sl.logical_z();
        let parts: Vec<f64> = (0..1u64 << k)
            .into_par_iter()
            .map(|signs| -> Result<f64> {
                let extra: Vec<_> = logical
                    .iter()
                    .enumerate()
                    .map(|(j, p)| {
                        let mut p = p.clone();
                        if signs >> j & 1 == 1 {
                            p.negate();
                        }
                        p
                    })
                    .collect();
                let pure = sl.extended(&extra)?;
                let mut psi = StateVector::from_amplitudes(pure.state_vector()?)?;
                psi.run(&induced.circuit)?;
                Ok(psi.expectation(op, &local)?.re)
            })
            .collect::<Result<_>>()?;
        let value = parts.iter().sum::<f64>() / (1u64 << k) as f64;
        return Ok(Estimate { value, cone: m, mixed: k, path: EstimatorPath::Mixture });
    }
    let local_region = Region::from_iter_unchecked(local.iter().copied());
    let mut sum = PauliSum::from_dense(op, &local_region, m)?;
    sum.evolve(&induced.circuit, Direction::Backward)?;
    let mut value = 0.0;
    for (p, coef) in sum.terms() {
        if let Some(e) = sl.find_element(p) {
            let sign = if e.phase() == p.phase() { 1.0 } else { -1.0 };
            value += sign * coef.re;
        }
    }
    Ok(Estimate { value, cone: m, mixed: k, path: EstimatorPath::Heisenberg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;
    use crate::pauli::PauliString;

    fn zz() -> CMat {
        "ZZ".parse::<PauliString>().unwrap().to_dense().unwrap()
    }

    #[test]
    fn plus_state_has_zero_z() {
        let cl = parse_circuit("H 0").unwrap();
        let q = LayeredCircuit::new(1);
        let z = "Z".parse::<PauliString>().unwrap().to_dense().unwrap();
        let e = estimate_local_observable_a1cq(&cl, &q, &z, &Region::full(1)).unwrap();
        assert!(e.value.abs() < 1e-12);
    }

    #[test]
    fn ghz_correlator_at_two_hundred() {
        let n = 200;
        let mut text = format!("QUBITS {n}\nH 0\n");
        for i in 0..n - 1 {
            text.push_str(&format!("/\nCNOT {i} {}\n", i + 1));
        }
        let cl = parse_circuit(&text).unwrap();
        let q = LayeredCircuit::new(n);
        let e = estimate_local_observable_a1cq(&cl, &q, &zz(), &Region::new(vec![0, 1], n).unwrap()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
        assert_eq!(e.cone, 2);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let cl = LayeredCircuit::new(1);
        let mut op = CMat::zeros(2, 2);
        op[(0, 1)] = crate::circuit::c(1.0, 0.0);
        assert!(estimate_local_observable_a1cq(&cl, &cl, &op, &Region::full(1)).is_err());
    }
}
