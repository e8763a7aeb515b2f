//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::circuit::{c, C64};
use crate::error::{MhError, Result};
use crate::region::Region;

pub type CMat = DMatrix<C64>;

pub fn zeros(d: usize) -> CMat {
    CMat::zeros(d, d)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && (m - m.adjoint()).iter().all(|z| z.norm() <= tol)
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

/// Gathers the bits of `b` at the positions of `region` into a compact index
/// (region position i ↔ bit i).
#[inline]
pub fn gather_bits(b: usize, region: &[usize]) -> usize {
    let mut out = 0;
    for (i, &q) in region.iter().enumerate() {
        out |= ((b >> q) & 1) << i;
    }
    out
}

#[inline]
pub fn scatter_bits(local: usize, region: &[usize]) -> usize {
    let mut out = 0;
    for (i, &q) in region.iter().enumerate() {
        out |= ((local >> i) & 1) << q;
    }
    out
}

/// Reduced density matrix of a pure state on `keep` (|keep| ≤ 14).
pub fn reduced_density_pure(psi: &[C64], n: usize, keep: &Region) -> Result<CMat> {
    if keep.len() > 14 {
        return Err(MhError::cap(format!("reduced density on {} qubits", keep.len())));
    }
    keep.check(n)?;
    let k = keep.len();
    let env = keep.complement(n);
    let dk = 1usize << k;
    let de = 1usize << (n - k);
    let mut m = CMat::zeros(dk, de);
    for (b, &a) in psi.iter().enumerate() {
        if a == c(0.0, 0.0) {
            continue;
        }
        m[(gather_bits(b, keep.qubits()), gather_bits(b, env.qubits()))] = a;
    }
    Ok(&m * m.adjoint())
}

/// Partial trace of a density matrix on `n` qubits keeping `keep`.
pub fn partial_trace(rho: &CMat, n: usize, keep: &Region) -> Result<CMat> {
    if rho.nrows() != 1 << n {
        return Err(MhError::Dimension(format!("{}×{} matrix is not on {n} qubits", rho.nrows(), rho.ncols())));
    }
    keep.check(n)?;
    let env = keep.complement(n);
    let dk = 1usize << keep.len();
    let de = 1usize << env.len();
    let mut out = CMat::zeros(dk, dk);
    for i in 0..dk {
        let bi = scatter_bits(i, keep.qubits());
        for j in 0..dk {
            let bj = scatter_bits(j, keep.qubits());
            let mut acc = c(0.0, 0.0);
            for e in 0..de {
                let be = scatter_bits(e, env.qubits());
                acc += rho[(bi | be, bj | be)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Eigenvalues (ascending) of a Hermitian matrix.
pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Eigen-decomposition of a Hermitian matrix, eigenpairs sorted ascending.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let e = SymmetricEigen::new(m.clone());
    let mut idx: Vec<usize> = (0..e.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[a].partial_cmp(&e.eigenvalues[b]).unwrap());
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(m.nrows(), idx.len(), |r, col| e.eigenvectors[(r, idx[col])]);
    (vals, vecs)
}

/// Eigen-decomposition of a real symmetric matrix, sorted ascending.
pub fn eigh_real(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let e = SymmetricEigen::new(m.clone());
    let mut idx: Vec<usize> = (0..e.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[a].partial_cmp(&e.eigenvalues[b]).unwrap());
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(m.nrows(), idx.len(), |r, col| e.eigenvectors[(r, idx[col])]);
    (vals, vecs)
}

/// Σ|λ| for a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMat) -> f64 {
    eigvalsh(m).iter().map(|l| l.abs()).sum()
}

/// Largest singular value.
pub fn operator_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let h = m.adjoint() * m;
    eigvalsh(&h).last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Orthogonal projector onto the column span of `v` (columns orthonormal).
pub fn projector_from_basis(v: &CMat) -> CMat {
    v * v.adjoint()
}

/// Orthonormal basis of the range of a Hermitian PSD matrix (eigenvalues > tol).
pub fn range_basis(p: &CMat, tol: f64) -> CMat {
    let (vals, vecs) = eigh(p);
    let cols: Vec<DVector<C64>> =
        vals.iter().enumerate().filter(|(_, &l)| l > tol).map(|(i, _)| vecs.column(i).into_owned()).collect();
    if cols.is_empty() {
        CMat::zeros(p.nrows(), 0)
    } else {
        CMat::from_columns(&cols)
    }
}

/// Applies a `k`-qubit operator on `region` to every column of a state matrix
/// (dense on `n` qubits).
pub fn embed_operator(op: &CMat, region: &[usize], n: usize) -> Result<CMat> {
    let k = region.len();
    if op.nrows() != 1 << k || op.ncols() != 1 << k {
        return Err(MhError::Dimension(format!("operator is {}×{}, region has {k} qubits", op.nrows(), op.ncols())));
    }
    if n > 13 {
        return Err(MhError::cap(format!("dense operator on {n} qubits")));
    }
    let d = 1usize << n;
    let mut mask = 0usize;
    for &q in region {
        mask |= 1 << q;
    }
    let mut out = CMat::zeros(d, d);
    for col in 0..d {
        let lc = gather_bits(col, region);
        let rest = col & !mask;
        for lr in 0..(1usize << k) {
            let v = op[(lr, lc)];
            if v != c(0.0, 0.0) {
                out[(rest | scatter_bits(lr, region), col)] = v;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_reduced_state_is_maximally_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)];
        let rho = reduced_density_pure(&psi, 2, &Region::new(vec![0], 2).unwrap()).unwrap();
        assert!((rho - identity(2) * c(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_matches_pure_route() {
        let psi: Vec<C64> = (0..8).map(|i| c(i as f64 + 1.0, 0.5 - i as f64)).collect();
        let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let psi: Vec<C64> = psi.iter().map(|a| a / norm).collect();
        let v = DVector::from_vec(psi.clone());
        let rho = &v * v.adjoint();
        for keep in [vec![0], vec![1, 2], vec![0, 2]] {
            let r = Region::new(keep, 3).unwrap();
            let a = partial_trace(&rho, 3, &r).unwrap();
            let b = reduced_density_pure(&psi, 3, &r).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn embedded_operator_acts_on_right_qubit() {
        let x = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let e = embed_operator(&x, &[1], 2).unwrap();
        let expect = kron(&x, &identity(2));
        assert!((e - expect).norm() < 1e-12);
    }
}
