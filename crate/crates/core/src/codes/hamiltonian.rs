//! Local Hamiltonians as lists of dense terms, plus the builders used by the
//! code checks: stabilizer Hamiltonians, local-consistency Hamiltonians of a
//! state, and the clock/state history Hamiltonian for the CAT state.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::circuit::{c, C64};
use crate::error::{MhError, Result};
use crate::linalg::{eigh, gather_bits, is_hermitian, operator_norm, scatter_bits, CMat};
use crate::region::{subsets_of_size, Region};
use crate::simulate::StateVector;
use crate::stabilizer::StabilizerTableau;

pub const HERMITIAN_TOL: f64 = 1e-10;
/// Dense assembly cap (qubits).
pub const HAMILTONIAN_DENSE_CAP: usize = 13;

#[derive(Clone, Debug)]
pub struct Term {
    /// Local bit i of the matrix index is qubit `qubits[i]`.
    pub qubits: Vec<usize>,
    pub op: CMat,
}

#[derive(Clone, Debug)]
pub struct LocalHamiltonian {
    n: usize,
    terms: Vec<Term>,
    /// When set, `add_term` rejects terms with ‖h‖∞ > 1.
    unit_norm: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct HamiltonianSummary {
    pub n: usize,
    pub terms: usize,
    pub locality: usize,
    pub max_term_norm: f64,
}

impl LocalHamiltonian {
    pub fn new(n: usize) -> Self {
        LocalHamiltonian { n, terms: Vec::new(), unit_norm: true }
    }

    /// Hamiltonian that accepts terms of any norm.
    pub fn unnormalized(n: usize) -> Self {
        LocalHamiltonian { n, terms: Vec::new(), unit_norm: false }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn m(&self) -> usize {
        self.terms.len()
    }

    pub fn locality(&self) -> usize {
        self.terms.iter().map(|t| t.qubits.len()).max().unwrap_or(0)
    }

    pub fn enforces_unit_norm(&self) -> bool {
        self.unit_norm
    }

    pub fn max_term_norm(&self) -> f64 {
        self.terms.iter().map(|t| operator_norm(&t.op)).fold(0.0, f64::max)
    }

    pub fn summary(&self) -> HamiltonianSummary {
        HamiltonianSummary { n: self.n, terms: self.m(), locality: self.locality(), max_term_norm: self.max_term_norm() }
    }

    pub fn add_term(&mut self, qubits: Vec<usize>, op: CMat) -> Result<()> {
        let k = qubits.len();
        if k == 0 {
            return Err(MhError::invalid("term acts on no qubits"));
        }
        Region::new(qubits.clone(), self.n)?;
        if op.nrows() != 1 << k || op.ncols() != 1 << k {
            return Err(MhError::Dimension(format!("term is {}×{}, acts on {k} qubits", op.nrows(), op.ncols())));
        }
        if !is_hermitian(&op, HERMITIAN_TOL) {
            return Err(MhError::invalid(format!("term on {qubits:?} is not Hermitian")));
        }
        if self.unit_norm {
            let norm = operator_norm(&op);
            if norm > 1.0 + 1e-9 {
                return Err(MhError::invalid(format!("term on {qubits:?} has norm {norm} > 1")));
            }
        }
        self.terms.push(Term { qubits, op });
        Ok(())
    }

    /// H / max‖h_i‖ (same groundspace, unit-norm terms).
    pub fn rescaled(&self) -> LocalHamiltonian {
        let s = self.max_term_norm();
        let f = if s > 1.0 { 1.0 / s } else { 1.0 };
        LocalHamiltonian {
            n: self.n,
            terms: self.terms.iter().map(|t| Term { qubits: t.qubits.clone(), op: t.op.map(|z| z * f) }).collect(),
            unit_norm: true,
        }
    }

    /// Appends `a` ancilla qubits (indices n..n+a), each pinned by a −|0⟩⟨0| term.
    pub fn with_ancillas(&self, a: usize) -> Result<LocalHamiltonian> {
        let mut h = self.clone();
        h.n += a;
        let mut pin = CMat::zeros(2, 2);
        pin[(0, 0)] = c(-1.0, 0.0);
        for q in self.n..self.n + a {
            h.add_term(vec![q], pin.clone())?;
        }
        Ok(h)
    }

    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|t| t.op.iter().all(|z| z.im.abs() <= 1e-14))
    }

    /// Nonzero entries of H|b⟩.
    pub fn apply_to_basis(&self, b: usize) -> Vec<(usize, C64)> {
        let mut acc: HashMap<usize, C64> = HashMap::new();
        for t in &self.terms {
            let mask: usize = t.qubits.iter().map(|&q| 1usize << q).sum();
            let lc = gather_bits(b, &t.qubits);
            let rest = b & !mask;
            for lr in 0..t.op.nrows() {
                let v = t.op[(lr, lc)];
                if v.norm() > 0.0 {
                    *acc.entry(rest | scatter_bits(lr, &t.qubits)).or_insert(c(0.0, 0.0)) += v;
                }
            }
        }
        let mut out: Vec<_> = acc.into_iter().filter(|(_, v)| v.norm() > 1e-15).collect();
        out.sort_by_key(|&(i, _)| i);
        out
    }

    /// ⟨b_i|H|b_j⟩ on the span of the given basis states, with the norm of the
    /// part of H·span that leaves it.
    pub fn sector_matrix(&self, basis: &[usize]) -> (CMat, f64) {
        let index: HashMap<usize, usize> = basis.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        let mut m = CMat::zeros(basis.len(), basis.len());
        let mut leak = 0.0f64;
        for (j, &b) in basis.iter().enumerate() {
            for (r, v) in self.apply_to_basis(b) {
                match index.get(&r) {
                    Some(&i) => m[(i, j)] += v,
                    None => leak = leak.max(v.norm()),
                }
            }
        }
        (m, leak)
    }

    /// Dense 2ⁿ×2ⁿ matrix.
    pub fn dense(&self) -> Result<CMat> {
        if self.n > HAMILTONIAN_DENSE_CAP {
            return Err(MhError::cap(format!("dense Hamiltonian on {} qubits (cap {HAMILTONIAN_DENSE_CAP})", self.n)));
        }
        let d = 1usize << self.n;
        let mut out = CMat::zeros(d, d);
        for t in &self.terms {
            let mask: usize = t.qubits.iter().map(|&q| 1usize << q).sum();
            for col in 0..d {
                let lc = gather_bits(col, &t.qubits);
                let rest = col & !mask;
                for lr in 0..t.op.nrows() {
                    let v = t.op[(lr, lc)];
                    if v.norm() > 0.0 {
                        out[(rest | scatter_bits(lr, &t.qubits), col)] += v;
                    }
                }
            }
        }
        Ok(out)
    }

    /// ⟨ψ|H|ψ⟩.
    pub fn energy(&self, psi: &StateVector) -> Result<f64> {
        if psi.n() != self.n {
            return Err(MhError::Dimension(format!("state on {} qubits, Hamiltonian on {}", psi.n(), self.n)));
        }
        let mut e = 0.0;
        for t in &self.terms {
            e += psi.expectation(&t.op, &t.qubits)?.re;
        }
        Ok(e)
    }

    /// Σ_i λ_min(h_i), a lower bound on the ground energy reached exactly when
    /// H is frustration-free.
    pub fn local_energy_floor(&self) -> f64 {
        self.terms.iter().map(|t| eigh(&t.op).0[0]).sum()
    }

    /// Lines `TERM q0,q1,... : re,im re,im ...` (row-major), after `QUBITS n`.
    pub fn to_text(&self) -> String {
        let mut s = format!("QUBITS {}\n", self.n);
        for t in &self.terms {
            let qs: Vec<String> = t.qubits.iter().map(|q| q.to_string()).collect();
            let _ = write!(s, "TERM {} :", qs.join(","));
            for r in 0..t.op.nrows() {
                for col in 0..t.op.ncols() {
                    let z = t.op[(r, col)];
                    let _ = write!(s, " {},{}", z.re, z.im);
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<LocalHamiltonian> {
        let mut declared = None;
        let mut raw: Vec<(usize, Vec<usize>, Vec<C64>)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let syntax = |msg: String| MhError::Syntax { line: line_no, msg };
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("QUBITS") {
                let n = rest.trim().parse::<usize>().map_err(|_| syntax(format!("bad qubit count '{}'", rest.trim())))?;
                declared = Some(n);
                continue;
            }
            let Some(rest) = line.strip_prefix("TERM") else {
                return Err(syntax(format!("expected TERM or QUBITS, found '{line}'")));
            };
            let (qs, entries) = rest.split_once(':').ok_or_else(|| syntax("missing ':' after qubit list".into()))?;
            let qubits = qs
                .split(',')
                .map(|q| q.trim().parse::<usize>().map_err(|_| syntax(format!("bad qubit '{}'", q.trim()))))
                .collect::<Result<Vec<_>>>()?;
            let vals = entries
                .split_whitespace()
                .map(|e| {
                    let (re, im) = e.split_once(',').ok_or_else(|| syntax(format!("entry '{e}' is not re,im")))?;
                    let re = re.parse::<f64>().map_err(|_| syntax(format!("bad number '{re}'")))?;
                    let im = im.parse::<f64>().map_err(|_| syntax(format!("bad number '{im}'")))?;
                    Ok(c(re, im))
                })
                .collect::<Result<Vec<_>>>()?;
            let d = 1usize << qubits.len();
            if vals.len() != d * d {
                return Err(syntax(format!("term on {} qubits needs {} entries, found {}", qubits.len(), d * d, vals.len())));
            }
            raw.push((line_no, qubits, vals));
        }
        let n = declared.unwrap_or_else(|| raw.iter().flat_map(|(_, q, _)| q.iter().map(|&x| x + 1)).max().unwrap_or(0));
        let mut h = LocalHamiltonian::unnormalized(n);
        for (line, qubits, vals) in raw {
            let d = 1usize << qubits.len();
            h.add_term(qubits, CMat::from_row_slice(d, d, &vals)).map_err(|e| MhError::Syntax { line, msg: e.to_string() })?;
        }
        h.unit_norm = h.max_term_norm() <= 1.0 + 1e-9;
        Ok(h)
    }
}

/// Σ_g (I − g)/2 over the generators of `t`, each term on the support of g.
pub fn stabilizer_hamiltonian(t: &StabilizerTableau) -> Result<LocalHamiltonian> {
    let mut h = LocalHamiltonian::new(t.n());
    for g in t.generators() {
        let support = g.support();
        let local = g.restrict(&support).to_dense()?;
        let d = local.nrows();
        let term = (CMat::identity(d, d) - local).map(|z| z * 0.5);
        h.add_term(support.qubits().to_vec(), term)?;
    }
    Ok(h)
}

/// Σ_{|A| = level} (I − Π_A) with Π_A the projector onto the support of ψ_A.
/// Its groundspace holds every state that agrees with ψ on all regions of
/// size `level`; trivial terms (full-rank marginals) are dropped.
pub fn consistency_hamiltonian(psi: &StateVector, level: usize) -> Result<LocalHamiltonian> {
    let n = psi.n();
    let level = level.clamp(1, n);
    let mut h = LocalHamiltonian::new(n);
    for a in subsets_of_size(n, level) {
        let region = Region::from_iter_unchecked(a.iter().copied());
        let rho = psi.reduced_density(&region)?;
        let (vals, vecs) = eigh(&rho);
        let d = rho.nrows();
        let mut pi = CMat::zeros(d, d);
        let mut rank = 0;
        for (i, &l) in vals.iter().enumerate() {
            if l > 1e-10 {
                let v = vecs.column(i);
                pi += &v * v.adjoint();
                rank += 1;
            }
        }
        if rank < d {
            let term = CMat::identity(d, d) - pi;
            h.add_term(a, (&term + term.adjoint()).map(|z| z * 0.5))?;
        }
    }
    Ok(h)
}

fn clock(j: usize) -> usize {
    j - 1
}

/// History Hamiltonian for preparing CAT_n: unary clock on qubits 0..n, state
/// register on n..2n. Step 1 is H on s₁, step t ≥ 2 is CNOT(s₁ → s_t). Terms:
/// n − 1 clock-legality checks, n input checks, n propagation terms (3n − 1
/// in total, each of norm ≤ 1 and at most 5-local). The unique ground state
/// is the uniform history over the n + 1 time steps, at energy 0.
pub fn cat_history_hamiltonian(n: usize) -> Result<LocalHamiltonian> {
    if n == 0 {
        return Err(MhError::invalid("history Hamiltonian needs n ≥ 1"));
    }
    let state = |i: usize| n + i - 1;
    let mut h = LocalHamiltonian::new(2 * n);
    // Clock legality: forbid c_j = 0, c_{j+1} = 1.
    for j in 1..n {
        let mut p = CMat::zeros(4, 4);
        p[(2, 2)] = c(1.0, 0.0);
        h.add_term(vec![clock(j), clock(j + 1)], p)?;
    }
    // Input: at time 0 (c₁ = 0) every state qubit is 0.
    for i in 1..=n {
        let mut p = CMat::zeros(4, 4);
        p[(2, 2)] = c(1.0, 0.0); // c₁ = 0, s_i = 1
        h.add_term(vec![clock(1), state(i)], p)?;
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for t in 1..=n {
        let mut clocks = Vec::new();
        if t >= 2 {
            clocks.push(clock(t - 1));
        }
        let pos_t = clocks.len();
        clocks.push(clock(t));
        // Time t − 1: c_{t−1} = 1, c_t = 0 (c_{t+1} = 0 implied for legal clocks).
        let before: usize = if t >= 2 { 1 } else { 0 };
        let after = before | (1 << pos_t);
        if t < n {
            clocks.push(clock(t + 1));
        }
        let (targets, u): (Vec<usize>, CMat) = if t == 1 {
            (vec![state(1)], CMat::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]))
        } else {
            let mut u = CMat::zeros(4, 4);
            for x in 0..4usize {
                u[(x ^ ((x & 1) << 1), x)] = c(1.0, 0.0);
            }
            (vec![state(1), state(t)], u)
        };
        let k = clocks.len();
        let ds = u.nrows();
        let d = (1usize << k) * ds;
        let mut m = CMat::zeros(d, d);
        let idx = |cl: usize, x: usize| cl | (x << k);
        for x in 0..ds {
            m[(idx(before, x), idx(before, x))] += c(0.5, 0.0);
            m[(idx(after, x), idx(after, x))] += c(0.5, 0.0);
            for y in 0..ds {
                m[(idx(after, x), idx(before, y))] -= u[(x, y)] * 0.5;
                m[(idx(before, y), idx(after, x))] -= u[(x, y)].conj() * 0.5;
            }
        }
        let mut qubits = clocks;
        qubits.extend(targets);
        h.add_term(qubits, m)?;
    }
    Ok(h)
}

/// Basis indices of the legal-clock sector: clock 1^t 0^{n−t}, any state register.
pub fn cat_history_sector(n: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity((n + 1) << n);
    for t in 0..=n {
        for x in 0..1usize << n {
            out.push(((1usize << t) - 1) | (x << n));
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct HistorySpectrum {
    pub n: usize,
    pub sector_dim: usize,
    pub ground_energy: f64,
    /// Second-lowest eigenvalue inside the legal-clock sector.
    pub sector_gap: f64,
    /// Spectral gap of the full Hamiltonian: min(sector gap, 1), since every
    /// illegal clock pattern costs at least 1 and the sector is invariant.
    pub gap: f64,
}

/// Ground energy and gap of the CAT history Hamiltonian from the legal-clock sector.
pub fn cat_history_spectrum(n: usize) -> Result<HistorySpectrum> {
    if n > 10 {
        return Err(MhError::cap(format!("history sector for n = {n} (cap 10)")));
    }
    let h = cat_history_hamiltonian(n)?;
    let basis = cat_history_sector(n);
    let (m, leak) = h.sector_matrix(&basis);
    if leak > 1e-12 {
        return Err(MhError::invalid(format!("legal-clock sector not invariant (leak {leak})")));
    }
    let real = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re);
    let mut vals: Vec<f64> = SymmetricEigen::new(real).eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let sector_gap = vals.get(1).copied().unwrap_or(f64::INFINITY) - vals[0];
    Ok(HistorySpectrum { n, sector_dim: basis.len(), ground_energy: vals[0], sector_gap, gap: sector_gap.min(1.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{build_family, StateFamily};

    #[test]
    fn history_term_count_and_locality() {
        for n in 2..6 {
            let h = cat_history_hamiltonian(n).unwrap();
            assert_eq!(h.m(), 3 * n - 1);
            assert!(h.locality() <= 5);
            assert!(h.max_term_norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn history_state_has_zero_energy() {
        for n in 2..6 {
            let h = cat_history_hamiltonian(n).unwrap();
            let psi = build_family(&StateFamily::CatHistory, n).unwrap();
            assert!(h.energy(&psi).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn sector_spectrum_matches_dense_at_n3() {
        let spec = cat_history_spectrum(3).unwrap();
        let h = cat_history_hamiltonian(3).unwrap();
        let vals = crate::linalg::eigvalsh(&h.dense().unwrap());
        assert!(vals[0].abs() < 1e-10 && spec.ground_energy.abs() < 1e-10);
        assert!((vals[1] - spec.gap).abs() < 1e-9);
    }

    #[test]
    fn text_roundtrip() {
        let h = cat_history_hamiltonian(2).unwrap();
        let back = LocalHamiltonian::parse(&h.to_text()).unwrap();
        assert_eq!(back.m(), h.m());
        assert!((back.dense().unwrap() - h.dense().unwrap()).norm() < 1e-12);
        assert!(back.enforces_unit_norm());
    }

    #[test]
    fn rejects_bad_terms() {
        let mut h = LocalHamiltonian::new(2);
        let mut op = CMat::zeros(2, 2);
        op[(0, 1)] = c(1.0, 0.0);
        assert!(h.add_term(vec![0], op).is_err());
        assert!(h.add_term(vec![0], CMat::identity(2, 2).map(|z| z * 2.0)).is_err());
        assert!(LocalHamiltonian::parse("TERM 0 : 1,0 0,0").is_err());
    }

    #[test]
    fn ancillas_are_pinned_to_zero() {
        let h = LocalHamiltonian::new(1).with_ancillas(2).unwrap();
        let vals = crate::linalg::eigvalsh(&h.dense().unwrap());
        // The original qubit is free, so the ground level is doubly degenerate.
        assert!((vals[1] + 2.0).abs() < 1e-12 && (vals[2] + 1.0).abs() < 1e-12);
    }
}
