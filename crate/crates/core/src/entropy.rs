//! Von Neumann entropy and mutual information (base-2 logarithms), the
//! binary entropy with its power-law upper bound, continuity bounds, and the
//! explicit state families used by the lower bounds.

use serde::Serialize;

use crate::circuit::{c, C64};
use crate::error::{MhError, Result};
use crate::linalg::{eigvalsh, partial_trace, reduced_density_pure, trace, trace_norm_hermitian, CMat};
use crate::region::Region;
use crate::simulate::StateVector;
use crate::stabilizer::StabilizerTableau;

/// Eigenvalues below this count as zero.
pub const EIG_FLOOR: f64 = 1e-12;
const STATE_TOL: f64 = 1e-8;
/// Cap on |A ∪ B| for dense mutual information.
pub const MI_DENSE_CAP: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MiValue {
    pub value: f64,
    pub exact_integer: Option<i64>,
}

fn check_state(rho: &CMat) -> Result<Vec<f64>> {
    if rho.nrows() != rho.ncols() {
        return Err(MhError::Dimension("density matrix is not square".into()));
    }
    if (rho - rho.adjoint()).camax() > STATE_TOL {
        return Err(MhError::invalid("density matrix is not Hermitian"));
    }
    let tr = trace(rho);
    if (tr - c(1.0, 0.0)).norm() > STATE_TOL {
        return Err(MhError::invalid(format!("density matrix has trace {tr}")));
    }
    let ev = eigvalsh(rho);
    if ev.first().is_some_and(|&l| l < -STATE_TOL) {
        return Err(MhError::invalid(format!("density matrix has eigenvalue {}", ev[0])));
    }
    Ok(ev)
}

pub fn von_neumann(rho: &CMat) -> Result<f64> {
    let ev = check_state(rho)?;
    Ok(ev.iter().filter(|&&l| l > EIG_FLOOR).map(|&l| -l * l.log2()).sum::<f64>().max(0.0))
}

fn check_disjoint(a: &Region, b: &Region) -> Result<()> {
    if !a.is_disjoint(b) {
        return Err(MhError::InvalidRegion(format!("regions {a} and {b} overlap")));
    }
    Ok(())
}

/// I(A:B) = E(A) + E(B) − E(AB) of a density matrix on `n` qubits.
pub fn mutual_info_density(rho: &CMat, n: usize, a: &Region, b: &Region) -> Result<MiValue> {
    check_disjoint(a, b)?;
    let ab = a.union(b);
    let rho_ab = partial_trace(rho, n, &ab)?;
    mi_from_ab(&rho_ab, &ab, a, b)
}

fn mi_from_ab(rho_ab: &CMat, ab: &Region, a: &Region, b: &Region) -> Result<MiValue> {
    let loc = |r: &Region| Region::from_iter_unchecked(r.iter().map(|q| ab.position(*q).unwrap()));
    let rho_a = partial_trace(rho_ab, ab.len(), &loc(a))?;
    let rho_b = partial_trace(rho_ab, ab.len(), &loc(b))?;
    let v = von_neumann(&rho_a)? + von_neumann(&rho_b)? - von_neumann(rho_ab)?;
    Ok(MiValue { value: v.max(0.0), exact_integer: None })
}

pub fn mutual_info_dense(psi: &StateVector, a: &Region, b: &Region) -> Result<MiValue> {
    check_disjoint(a, b)?;
    let ab = a.union(b);
    if ab.len() > MI_DENSE_CAP {
        return Err(MhError::cap(format!("dense mutual information on {} qubits (cap {MI_DENSE_CAP})", ab.len())));
    }
    let v = pure_entropy(psi, a)? + pure_entropy(psi, b)? - pure_entropy(psi, &ab)?;
    Ok(MiValue { value: v.max(0.0), exact_integer: None })
}

/// E(X) of a pure state, from whichever of X and its complement is smaller.
pub fn pure_entropy(psi: &StateVector, x: &Region) -> Result<f64> {
    x.check(psi.n())?;
    let comp = x.complement(psi.n());
    let side = if comp.len() < x.len() { &comp } else { x };
    von_neumann(&reduced_density_pure(psi.amplitudes(), psi.n(), side)?)
}

/// Exact integer I(A:B) = |S_AB| − |S_A| − |S_B| (also valid for mixed states).
pub fn mutual_info_stabilizer(t: &StabilizerTableau, a: &Region, b: &Region) -> Result<MiValue> {
    check_disjoint(a, b)?;
    let ab = a.union(b);
    let i = t.restrict(&ab)?.rank() as i64 - t.restrict(a)?.rank() as i64 - t.restrict(b)?.rank() as i64;
    Ok(MiValue { value: i as f64, exact_integer: Some(i) })
}

pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(MhError::invalid(format!("probability {p} outside [0,1]")));
    }
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    Ok(term(p) + term(1.0 - p))
}

/// e · ε^{1/ln 4}, an upper bound on H(ε) over [0, 1].
pub fn h_upper(eps: f64) -> f64 {
    std::f64::consts::E * eps.powf(1.0 / 4f64.ln())
}

/// 2ε(|A| + |B|) + 3H(ε): how far I(A:B) can move under an ε trace-distance perturbation.
pub fn fa_mi_deviation_bound(eps: f64, size_a: usize, size_b: usize) -> Result<f64> {
    Ok(2.0 * eps * (size_a + size_b) as f64 + 3.0 * binary_entropy(eps)?)
}

/// εn + H(ε): entropy continuity on n qubits at trace distance ε ≤ 1 − 2^{−n}.
pub fn fannes_audenaert_bound(eps: f64, n: usize) -> Result<f64> {
    Ok(eps * n as f64 + binary_entropy(eps)?)
}

/// ½‖ρ − σ‖₁.
pub fn trace_distance(rho: &CMat, sigma: &CMat) -> Result<f64> {
    if rho.shape() != sigma.shape() {
        return Err(MhError::Dimension("trace distance of differently sized matrices".into()));
    }
    Ok(0.5 * trace_norm_hermitian(&(rho - sigma)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateFamily {
    BiasedCat { gamma: f64 },
    WState,
    /// History state of the CAT preparation: clock qubits 0..n (unary), state qubits n..2n.
    CatHistory,
}

impl StateFamily {
    pub fn name(&self) -> &'static str {
        match self {
            StateFamily::BiasedCat { .. } => "biased_cat",
            StateFamily::WState => "w_state",
            StateFamily::CatHistory => "cat_history",
        }
    }

    pub fn qubits(&self, n: usize) -> usize {
        match self {
            StateFamily::CatHistory => 2 * n,
            _ => n,
        }
    }

    /// Closed-form I(A:B) where one is known.
    pub fn analytic_mi(&self, n: usize, a: &Region, b: &Region) -> Result<Option<f64>> {
        check_disjoint(a, b)?;
        let ab = a.union(b);
        ab.check(self.qubits(n))?;
        if a.is_empty() || b.is_empty() {
            return Ok(Some(0.0));
        }
        match *self {
            StateFamily::BiasedCat { gamma } => {
                let h = binary_entropy(gamma)?;
                Ok(Some(if ab.len() == n { 2.0 * h } else { h }))
            }
            StateFamily::WState => {
                // ρ_X = (1 − |X|/n)|0⟩⟨0| + (|X|/n)|W_X⟩⟨W_X| on any region X.
                let e = |k: usize| binary_entropy(k as f64 / n as f64);
                Ok(Some(e(a.len())? + e(b.len())? - e(ab.len())?))
            }
            StateFamily::CatHistory => Ok(None),
        }
    }
}

const FAMILY_CAP: usize = 24;

pub fn build_family(f: &StateFamily, n: usize) -> Result<StateVector> {
    if n == 0 {
        return Err(MhError::invalid("family needs n ≥ 1"));
    }
    let total = f.qubits(n);
    if total > FAMILY_CAP {
        return Err(MhError::cap(format!("family state on {total} qubits (cap {FAMILY_CAP})")));
    }
    let mut amps = vec![c(0.0, 0.0); 1usize << total];
    match *f {
        StateFamily::BiasedCat { gamma } => {
            if !(0.0..=1.0).contains(&gamma) {
                return Err(MhError::invalid(format!("γ = {gamma} outside [0,1]")));
            }
            amps[0] = c(gamma.sqrt(), 0.0);
            amps[(1usize << n) - 1] += c((1.0 - gamma).sqrt(), 0.0);
        }
        StateFamily::WState => {
            let a = c(1.0 / (n as f64).sqrt(), 0.0);
            for q in 0..n {
                amps[1 << q] = a;
            }
        }
        StateFamily::CatHistory => {
            // n + 1 terms; normalized over all of them.
            let w = 1.0 / ((n + 1) as f64).sqrt();
            let h = std::f64::consts::FRAC_1_SQRT_2;
            for t in 0..=n {
                let clock = (1usize << t) - 1;
                if t == 0 {
                    amps[clock] += c(w, 0.0);
                } else {
                    let ones = ((1usize << t) - 1) << n;
                    amps[clock] += c(w * h, 0.0);
                    amps[clock | ones] += c(w * h, 0.0);
                }
            }
        }
    }
    StateVector::from_amplitudes(amps)
}

/// Clock patterns (as basis-index masks of the clock register) carrying weight.
pub fn clock_support(psi: &StateVector, n: usize) -> Vec<usize> {
    let mut pats: Vec<usize> = psi
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 1e-20)
        .map(|(b, _)| b & ((1usize << n) - 1))
        .collect();
    pats.sort_unstable();
    pats.dedup();
    pats
}

/// min over pairs i < j of I(i:j), computed densely.
pub fn min_pairwise_mi(psi: &StateVector, qubits: &Region) -> Result<f64> {
    let q = qubits.qubits();
    let mut best = f64::INFINITY;
    for i in 0..q.len() {
        for j in i + 1..q.len() {
            let a = Region::from_iter_unchecked([q[i]]);
            let b = Region::from_iter_unchecked([q[j]]);
            best = best.min(mutual_info_dense(psi, &a, &b)?.value);
        }
    }
    Ok(best)
}

pub fn one_qubit_projector(bit: bool) -> CMat {
    let mut m = CMat::zeros(2, 2);
    let i = bit as usize;
    m[(i, i)] = C64::new(1.0, 0.0);
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: &[usize], n: usize) -> Region {
        Region::new(v.to_vec(), n).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let mut rho = CMat::zeros(2, 2);
        rho[(0, 0)] = c(1.0, 0.0);
        assert_eq!(von_neumann(&rho).unwrap(), 0.0);
        let half = CMat::identity(2, 2) * c(0.5, 0.0);
        assert!((von_neumann(&half).unwrap() - 1.0).abs() < 1e-12);
        let mut bad = CMat::zeros(2, 2);
        bad[(0, 0)] = c(2.0, 0.0);
        assert!(von_neumann(&bad).is_err());
    }

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!(binary_entropy(1.5).is_err());
        assert_eq!(fa_mi_deviation_bound(0.0, 3, 4).unwrap(), 0.0);
    }

    #[test]
    fn stabilizer_examples() {
        let ghz = StabilizerTableau::from_strs(&["XXXX", "ZZII", "IZZI", "IIZZ"]).unwrap();
        assert_eq!(mutual_info_stabilizer(&ghz, &r(&[0], 4), &r(&[1], 4)).unwrap().exact_integer, Some(1));
        let bell = StabilizerTableau::from_strs(&["XX", "ZZ"]).unwrap();
        assert_eq!(mutual_info_stabilizer(&bell, &r(&[0], 2), &r(&[1], 2)).unwrap().exact_integer, Some(2));
        assert!(mutual_info_stabilizer(&bell, &r(&[0], 2), &r(&[0, 1], 2)).is_err());
    }

    #[test]
    fn w_state_amplitudes() {
        let w = build_family(&StateFamily::WState, 3).unwrap();
        for (b, a) in w.amplitudes().iter().enumerate() {
            let expect = if (b as u32).count_ones() == 1 { 1.0 / 3f64.sqrt() } else { 0.0 };
            assert!((a.re - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn cat_history_has_n_plus_one_clock_patterns() {
        let n = 4;
        let psi = build_family(&StateFamily::CatHistory, n).unwrap();
        assert_eq!(clock_support(&psi, n), vec![0b0000, 0b0001, 0b0011, 0b0111, 0b1111]);
    }
}
