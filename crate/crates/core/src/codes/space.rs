//! Code spaces as orthonormal bases of dense subspaces: stabilizer codes,
//! Hamiltonian groundspaces, local stabilizer codes, and brute-force distance.

use rayon::prelude::*;
use serde::Serialize;

use super::hamiltonian::LocalHamiltonian;
use crate::circuit::{c, LayeredCircuit, C64};
use crate::error::{MhError, Result};
use crate::linalg::{eigh, eigh_real, operator_norm, CMat};
use crate::pauli::PauliString;
use crate::region::{binomial, subsets_of_size};
use crate::simulate::StateVector;
use crate::stabilizer::{StabilizerTableau, ENUM_RANK_CAP};

/// Largest register for dense code spaces.
pub const CODE_DENSE_CAP: usize = 13;
/// Largest register for brute-force distance.
pub const DISTANCE_CAP: usize = 10;
/// A ⊆ B when ‖(I − P_B) P_A‖∞ is below this.
pub const CONTAIN_TOL: f64 = 1e-7;
pub const KL_TOL: f64 = 1e-8;
/// Ground-cluster width for groundspace extraction.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Multiply-add budget for one distance computation.
const KL_BUDGET: f64 = 4e10;

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Stabilizer { generators: Vec<String> },
    Groundspace { terms: usize, locality: usize },
    LocalStabilizer { ell: usize, generators: Vec<String> },
    Mapped { depth: usize, source: Box<Provenance> },
    Basis,
}

#[derive(Clone, Debug, Serialize)]
pub struct CodeSpace {
    n: usize,
    dim: usize,
    provenance: Provenance,
    #[serde(skip)]
    basis: CMat,
}

/// Gram–Schmidt on the columns of `v`, dropping columns whose residual norm is below `tol`.
pub fn orthonormalize(v: &CMat, tol: f64) -> CMat {
    let mut cols: Vec<nalgebra::DVector<C64>> = Vec::new();
    for j in 0..v.ncols() {
        let mut w = v.column(j).into_owned();
        for _ in 0..2 {
            for q in &cols {
                let proj = q.dotc(&w);
                w -= q * proj;
            }
        }
        let norm = w.norm();
        if norm > tol {
            cols.push(w / c(norm, 0.0));
        }
    }
    if cols.is_empty() {
        CMat::zeros(v.nrows(), 0)
    } else {
        CMat::from_columns(&cols)
    }
}

fn gens_text(t: &StabilizerTableau) -> Vec<String> {
    t.generators().iter().map(|g| g.to_string()).collect()
}

impl CodeSpace {
    fn check_n(n: usize) -> Result<()> {
        if n > CODE_DENSE_CAP {
            return Err(MhError::cap(format!("dense code space on {n} qubits (cap {CODE_DENSE_CAP})")));
        }
        Ok(())
    }

    /// Span of the columns of `v` (orthonormalized).
    pub fn from_basis(n: usize, v: &CMat) -> Result<CodeSpace> {
        Self::check_n(n)?;
        if v.nrows() != 1 << n {
            return Err(MhError::Dimension(format!("basis vectors have length {}, expected {}", v.nrows(), 1usize << n)));
        }
        let basis = orthonormalize(v, 1e-9);
        if basis.ncols() == 0 {
            return Err(MhError::invalid("empty code space"));
        }
        Ok(CodeSpace { n, dim: basis.ncols(), provenance: Provenance::Basis, basis })
    }

    /// Range of a dense projector, validated: P = P† = P² within 1e−9 and
    /// tr P within 1e−6 of an integer.
    pub fn from_projector(n: usize, p: &CMat) -> Result<CodeSpace> {
        Self::check_n(n)?;
        let d = 1usize << n;
        if p.nrows() != d || p.ncols() != d {
            return Err(MhError::Dimension(format!("projector is {}×{}, expected {d}×{d}", p.nrows(), p.ncols())));
        }
        if (p - p.adjoint()).iter().any(|z| z.norm() > 1e-9) || (p * p - p).iter().any(|z| z.norm() > 1e-9) {
            return Err(MhError::invalid("matrix is not an orthogonal projector"));
        }
        let tr = p.trace().re;
        let dim = tr.round();
        if (tr - dim).abs() > 1e-6 || dim < 1.0 {
            return Err(MhError::invalid(format!("projector trace {tr} is not a positive integer")));
        }
        let basis = orthonormalize(p, 1e-6);
        if basis.ncols() != dim as usize {
            return Err(MhError::invalid(format!("projector range has {} columns, trace {dim}", basis.ncols())));
        }
        Ok(CodeSpace { n, dim: dim as usize, provenance: Provenance::Basis, basis })
    }

    /// Joint +1 eigenspace of a stabilizer group; dim = 2^{n − rank}.
    pub fn from_stabilizer(t: &StabilizerTableau) -> Result<CodeSpace> {
        let n = t.n();
        Self::check_n(n)?;
        let logical = t.logical_z();
        let k = logical.len();
        let mut cols = Vec::with_capacity(1 << k);
        for signs in 0..1usize << k {
            let extra: Vec<PauliString> = logical
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
            cols.push(nalgebra::DVector::from_vec(t.extended(&extra)?.state_vector()?));
        }
        let basis = CMat::from_columns(&cols);
        Ok(CodeSpace { n, dim: 1 << k, provenance: Provenance::Stabilizer { generators: gens_text(t) }, basis })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn with_provenance(mut self, p: Provenance) -> CodeSpace {
        self.provenance = p;
        self
    }

    /// Orthonormal basis, one codeword per column.
    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    pub fn projector(&self) -> CMat {
        &self.basis * self.basis.adjoint()
    }

    pub fn codeword(&self, j: usize) -> StateVector {
        StateVector::from_amplitudes(self.basis.column(j).iter().copied().collect()).expect("orthonormal column")
    }

    /// ‖(I − P_other) P_self‖∞.
    pub fn containment_residual(&self, other: &CodeSpace) -> Result<f64> {
        if self.n != other.n {
            return Err(MhError::Dimension(format!("codes on {} and {} qubits", self.n, other.n)));
        }
        let w = &self.basis - &other.basis * (other.basis.adjoint() * &self.basis);
        Ok(operator_norm(&w))
    }

    pub fn is_subspace_of(&self, other: &CodeSpace) -> Result<bool> {
        Ok(self.containment_residual(other)? < CONTAIN_TOL)
    }

    pub fn equals(&self, other: &CodeSpace) -> Result<bool> {
        Ok(self.dim == other.dim && self.is_subspace_of(other)? && other.is_subspace_of(self)?)
    }

    /// Weight of ψ outside the code: 1 − ⟨ψ|P|ψ⟩.
    pub fn leakage(&self, psi: &StateVector) -> Result<f64> {
        if psi.n() != self.n {
            return Err(MhError::Dimension(format!("state on {} qubits, code on {}", psi.n(), self.n)));
        }
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        let overlap = self.basis.adjoint() * v;
        Ok((1.0 - overlap.norm_squared()).max(0.0))
    }

    /// U·C.
    pub fn mapped(&self, u: &LayeredCircuit) -> Result<CodeSpace> {
        if u.n() != self.n {
            return Err(MhError::Dimension(format!("circuit on {} qubits, code on {}", u.n(), self.n)));
        }
        let cols = (0..self.dim)
            .into_par_iter()
            .map(|j| {
                let mut psi = self.codeword(j);
                psi.run(u)?;
                Ok(nalgebra::DVector::from_vec(psi.into_amplitudes()))
            })
            .collect::<Result<Vec<_>>>()?;
        let basis = orthonormalize(&CMat::from_columns(&cols), 1e-9);
        Ok(CodeSpace {
            n: self.n,
            dim: basis.ncols(),
            provenance: Provenance::Mapped { depth: u.depth(), source: Box::new(self.provenance.clone()) },
            basis,
        })
    }

    /// P Q P = λ P for the Pauli `q`.
    fn kl_holds(&self, q: &PauliString) -> bool {
        let d = 1usize << self.n;
        let k = self.dim;
        let mut qv = CMat::zeros(d, k);
        for b in 0..d {
            let (b2, coef) = q.act_on_basis(b as u64);
            for j in 0..k {
                qv[(b2 as usize, j)] = coef * self.basis[(b, j)];
            }
        }
        let m = self.basis.adjoint() * qv;
        let lambda = m[(0, 0)];
        for i in 0..k {
            for j in 0..k {
                let expect = if i == j { lambda } else { c(0.0, 0.0) };
                if (m[(i, j)] - expect).norm() > KL_TOL {
                    return false;
                }
            }
        }
        true
    }

    /// Whether some Pauli supported in `support` violates the Knill–Laflamme condition.
    fn kl_violation_on(&self, support: &[usize]) -> bool {
        let w = support.len();
        (0..4usize.pow(w as u32)).into_par_iter().any(|code| {
            let mut p = PauliString::identity(self.n);
            let mut x = code;
            for &q in support {
                let (xb, zb) = match x % 4 {
                    0 => (false, false),
                    1 => (true, false),
                    2 => (true, true),
                    _ => (false, true),
                };
                p.set_bits(q, xb, zb);
                x /= 4;
            }
            !self.kl_holds(&p)
        })
    }

    /// Whether erasure of `region` is correctable (all Paulis on it satisfy KL).
    pub fn is_correctable(&self, region: &[usize]) -> Result<bool> {
        if region.len() > DISTANCE_CAP {
            return Err(MhError::cap(format!("correctability of a {}-qubit region (cap {DISTANCE_CAP})", region.len())));
        }
        if self.dim == 1 {
            return Ok(true);
        }
        Ok(!self.kl_violation_on(region))
    }
}

/// Code distance by brute force over Pauli errors, smallest weight first.
/// A one-dimensional code has distance n + 1.
pub fn distance_bruteforce(code: &CodeSpace) -> Result<usize> {
    let n = code.n;
    if n > DISTANCE_CAP {
        return Err(MhError::cap(format!("brute-force distance on {n} qubits (cap {DISTANCE_CAP})")));
    }
    if code.dim == 1 {
        return Ok(n + 1);
    }
    let d = (1u64 << n) as f64;
    let k = code.dim as f64;
    let mut spent = 0.0;
    for w in 1..=n {
        spent += binomial(n, w) as f64 * 3f64.powi(w as i32) * d * k * (k + 1.0);
        if spent > KL_BUDGET {
            return Err(MhError::cap(format!("distance search past weight {} exceeds the work budget", w - 1)));
        }
        let violated = subsets_of_size(n, w).into_par_iter().any(|support| {
            // Only strings acting nontrivially on every qubit of the support.
            let mut idx = vec![1u8; w];
            loop {
                let mut p = PauliString::identity(n);
                for (i, &q) in support.iter().enumerate() {
                    let (xb, zb) = match idx[i] {
                        1 => (true, false),
                        2 => (true, true),
                        _ => (false, true),
                    };
                    p.set_bits(q, xb, zb);
                }
                if !code.kl_holds(&p) {
                    return true;
                }
                let mut i = 0;
                loop {
                    if i == w {
                        return false;
                    }
                    idx[i] += 1;
                    if idx[i] <= 3 {
                        break;
                    }
                    idx[i] = 1;
                    i += 1;
                }
            }
        });
        if violated {
            return Ok(w);
        }
    }
    Ok(n + 1)
}

/// Code spanned by the states stabilized by all weight-≤ℓ elements of a pure
/// stabilizer group.
pub fn local_stab_code(t: &StabilizerTableau, ell: usize) -> Result<CodeSpace> {
    if !t.is_pure() {
        return Err(MhError::InvalidGroup(format!("rank {} on {} qubits is not a pure state", t.rank(), t.n())));
    }
    if t.rank() > ENUM_RANK_CAP {
        return Err(MhError::cap(format!("enumerating a rank-{} group (cap {ENUM_RANK_CAP})", t.rank())));
    }
    CodeSpace::check_n(t.n())?;
    let elems = t.local_elements(ell)?;
    let sub = if elems.is_empty() { StabilizerTableau::empty(t.n()) } else { StabilizerTableau::canonicalize(t.n(), &elems)? };
    let generators = gens_text(&sub);
    Ok(CodeSpace::from_stabilizer(&sub)?.with_provenance(Provenance::LocalStabilizer { ell, generators }))
}

#[derive(Clone, Debug, Serialize)]
pub struct GroundSpace {
    pub code: CodeSpace,
    pub ground_energy: f64,
    /// λ₁ − λ₀; infinite when the whole space is ground.
    pub gap: f64,
    /// Lowest few eigenvalues.
    pub low_spectrum: Vec<f64>,
}

/// Groundspace by dense diagonalization: eigenvectors within 1e−8 (chained)
/// of the minimum.
pub fn groundspace(h: &LocalHamiltonian) -> Result<GroundSpace> {
    let n = h.n();
    CodeSpace::check_n(n)?;
    let dense = h.dense()?;
    let (vals, vecs) = if h.is_real() {
        let real = nalgebra::DMatrix::from_fn(dense.nrows(), dense.ncols(), |i, j| dense[(i, j)].re);
        let (v, w) = eigh_real(&real);
        (v, w.map(|x| c(x, 0.0)))
    } else {
        eigh(&dense)
    };
    let mut k = 1;
    while k < vals.len() && vals[k] - vals[k - 1] <= CLUSTER_TOL {
        k += 1;
    }
    if vals[k - 1] - vals[0] > 10.0 * CLUSTER_TOL {
        return Err(MhError::Ambiguity(format!(
            "eigenvalues chain from {} to {} in steps below {CLUSTER_TOL}",
            vals[0],
            vals[k - 1]
        )));
    }
    let gap = if k < vals.len() { vals[k] - vals[0] } else { f64::INFINITY };
    let basis = vecs.columns(0, k).into_owned();
    let code = CodeSpace {
        n,
        dim: k,
        provenance: Provenance::Groundspace { terms: h.m(), locality: h.locality() },
        basis: orthonormalize(&basis, 1e-9),
    };
    Ok(GroundSpace { code, ground_energy: vals[0], gap, low_spectrum: vals.iter().take(8).copied().collect() })
}

/// The [[4,2,2]] code.
pub fn code_422() -> StabilizerTableau {
    StabilizerTableau::from_strs(&["XXXX", "ZZZZ"]).expect("valid group")
}

/// The [[5,1,3]] code.
pub fn code_513() -> StabilizerTableau {
    StabilizerTableau::from_strs(&["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]).expect("valid group")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::hamiltonian::stabilizer_hamiltonian;

    fn ghz(n: usize) -> StabilizerTableau {
        let mut g = vec!["X".repeat(n)];
        for i in 0..n - 1 {
            let mut s = vec!['I'; n];
            s[i] = 'Z';
            s[i + 1] = 'Z';
            g.push(s.into_iter().collect());
        }
        let refs: Vec<&str> = g.iter().map(|s| s.as_str()).collect();
        StabilizerTableau::from_strs(&refs).unwrap()
    }

    #[test]
    fn standard_code_distances() {
        assert_eq!(distance_bruteforce(&CodeSpace::from_stabilizer(&code_422()).unwrap()).unwrap(), 2);
        assert_eq!(distance_bruteforce(&CodeSpace::from_stabilizer(&code_513()).unwrap()).unwrap(), 3);
        assert_eq!(distance_bruteforce(&CodeSpace::from_stabilizer(&ghz(4)).unwrap()).unwrap(), 5);
    }

    #[test]
    fn local_stabilizer_examples() {
        assert_eq!(local_stab_code(&ghz(4), 2).unwrap().dim(), 2);
        assert_eq!(local_stab_code(&StabilizerTableau::zero_state(5), 1).unwrap().dim(), 1);
        let bell2 = StabilizerTableau::from_strs(&["XXII", "ZZII", "IIXX", "IIZZ"]).unwrap();
        assert_eq!(local_stab_code(&bell2, 1).unwrap().dim(), 16);
    }

    #[test]
    fn ghz_stabilizer_hamiltonian() {
        let g = groundspace(&stabilizer_hamiltonian(&ghz(4)).unwrap()).unwrap();
        assert_eq!(g.code.dim(), 1);
        assert!((g.gap - 1.0).abs() < 1e-9);
        assert!(g.ground_energy.abs() < 1e-9);
    }

    #[test]
    fn projector_roundtrip() {
        let code = CodeSpace::from_stabilizer(&code_422()).unwrap();
        let back = CodeSpace::from_projector(4, &code.projector()).unwrap();
        assert_eq!(back.dim(), 4);
        assert!(back.equals(&code).unwrap());
        assert!(CodeSpace::from_projector(1, &CMat::identity(2, 2).map(|z| z * 0.5)).is_err());
    }
}
