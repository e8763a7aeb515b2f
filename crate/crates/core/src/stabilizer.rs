//! Stabilizer groups in canonical (reduced row echelon) form.
//!
//! Rows are ordered X-pivots by qubit, then Z-pivots by qubit, and every pivot
//! column is cleared in all other rows, so two tableaux are equal iff they
//! generate the same group.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::bits::{left_nullspace, BitVec, F2Span};
use crate::circuit::{c, Gate, GateKind, LayeredCircuit, C64};
use crate::error::{MhError, Result};
use crate::linalg::CMat;
use crate::pauli::PauliString;
use crate::region::Region;

/// Group enumeration cap (2^rank elements).
pub const ENUM_RANK_CAP: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StabilizerTableau {
    n: usize,
    gens: Vec<PauliString>,
}

impl Serialize for StabilizerTableau {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct View {
            n: usize,
            rank: usize,
            generators: Vec<String>,
        }
        View { n: self.n, rank: self.rank(), generators: self.gens.iter().map(|g| g.to_string()).collect() }
            .serialize(s)
    }
}

/// p ← U p U† for a Clifford-kind unitary gate U.
pub fn conjugate_pauli(p: &mut PauliString, g: &Gate) -> Result<()> {
    conj_impl(p, g, false)
}

/// p ← U† p U.
pub fn conjugate_pauli_adjoint(p: &mut PauliString, g: &Gate) -> Result<()> {
    conj_impl(p, g, true)
}

fn conj_impl(p: &mut PauliString, g: &Gate, adjoint: bool) -> Result<()> {
    let q = &g.qubits;
    match &g.kind {
        GateKind::H => p.conj_h(q[0]),
        GateKind::S if adjoint => p.conj_sdg(q[0]),
        GateKind::S => p.conj_s(q[0]),
        GateKind::X => p.conj_x(q[0]),
        GateKind::Y => p.conj_y(q[0]),
        GateKind::Z => p.conj_z(q[0]),
        GateKind::Cnot => p.conj_cnot(q[0], q[1]),
        GateKind::Cz => p.conj_cz(q[0], q[1]),
        GateKind::Swap => p.conj_swap(q[0], q[1]),
        GateKind::Fanout => {
            for &t in &q[1..] {
                p.conj_cnot(q[0], t);
            }
        }
        other => {
            return Err(MhError::GateClass(format!("{} is not a Clifford unitary", other.name())));
        }
    }
    Ok(())
}

impl StabilizerTableau {
    /// The trivial group (maximally mixed state).
    pub fn empty(n: usize) -> Self {
        StabilizerTableau { n, gens: Vec::new() }
    }

    /// |0ⁿ⟩.
    pub fn zero_state(n: usize) -> Self {
        let gens = (0..n)
            .map(|q| {
                let mut p = PauliString::identity(n);
                p.set_bits(q, false, true);
                p
            })
            .collect();
        StabilizerTableau { n, gens }
    }

    /// Canonical tableau of the group generated by `gens`.
    pub fn canonicalize(n: usize, gens: &[PauliString]) -> Result<Self> {
        for g in gens {
            if g.n() != n {
                return Err(MhError::Dimension(format!("generator on {} qubits, expected {n}", g.n())));
            }
            if !g.is_hermitian() {
                return Err(MhError::InvalidGroup(format!("{g} is not Hermitian")));
            }
        }
        for i in 0..gens.len() {
            for j in i + 1..gens.len() {
                if !gens[i].commutes_unchecked(&gens[j]) {
                    return Err(MhError::InvalidGroup(format!("{} and {} anticommute", gens[i], gens[j])));
                }
            }
        }
        Self::canonicalize_commuting(n, gens.to_vec())
    }

    /// Canonical form for generators already known to commute.
    pub(crate) fn canonicalize_commuting(n: usize, mut rows: Vec<PauliString>) -> Result<Self> {
        let mut r = 0;
        for pass_z in [false, true] {
            for q in 0..n {
                let has = |p: &PauliString| if pass_z { p.z(q) } else { p.x(q) };
                let Some(p) = (r..rows.len()).find(|&i| has(&rows[i])) else { continue };
                rows.swap(r, p);
                let pivot = rows[r].clone();
                for (i, row) in rows.iter_mut().enumerate() {
                    if i != r && has(row) {
                        row.mul_assign_right(&pivot);
                    }
                }
                r += 1;
            }
        }
        for row in &rows[r..] {
            if row.phase() != 0 {
                return Err(MhError::InvalidGroup("generators produce −I".into()));
            }
        }
        rows.truncate(r);
        Ok(StabilizerTableau { n, gens: rows })
    }

    pub fn from_strs(gens: &[&str]) -> Result<Self> {
        let ps: Vec<PauliString> = gens.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        let n = ps.first().map(|p| p.n()).ok_or_else(|| MhError::invalid("no generators"))?;
        Self::canonicalize(n, &ps)
    }

    /// Stabilizer state C|0ⁿ⟩ for a Clifford circuit C.
    pub fn from_circuit(c: &LayeredCircuit) -> Result<Self> {
        StabilizerTableau::zero_state(c.n()).conjugate_by_clifford(c)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.gens
    }

    pub fn is_pure(&self) -> bool {
        self.rank() == self.n
    }

    /// S_A = {σ_A : σ_A ⊗ I ∈ S} as a tableau on |A| qubits.
    pub fn restrict(&self, a: &Region) -> Result<StabilizerTableau> {
        a.check(self.n)?;
        if a.len() == self.n {
            return Ok(self.clone());
        }
        let comp = a.complement(self.n);
        let mut rows = self.gens.clone();
        let mut used = vec![false; rows.len()];
        for &q in comp.qubits() {
            for zcol in [false, true] {
                let has = |p: &PauliString| if zcol { p.z(q) } else { p.x(q) };
                let Some(p) = (0..rows.len()).find(|&i| !used[i] && has(&rows[i])) else { continue };
                used[p] = true;
                let pivot = rows[p].clone();
                for i in 0..rows.len() {
                    if !used[i] && has(&rows[i]) {
                        rows[i].mul_assign_right(&pivot);
                    }
                }
            }
        }
        let kept: Vec<PauliString> =
            rows.iter().zip(&used).filter(|(_, &u)| !u).map(|(r, _)| r.restrict(a)).collect();
        StabilizerTableau::canonicalize_commuting(a.len(), kept)
    }

    /// Entropy (bits) of the reduced state on `a`: |A| − |S_A|.
    pub fn entropy(&self, a: &Region) -> Result<usize> {
        Ok(a.len() - self.restrict(a)?.rank())
    }

    /// The group element equal to `p` up to sign, if any.
    pub fn find_element(&self, p: &PauliString) -> Option<PauliString> {
        if p.n() != self.n {
            return None;
        }
        let mut w = p.clone();
        w.set_phase(0);
        let mut acc = PauliString::identity(self.n);
        for g in &self.gens {
            let (pass_z, q) = self.pivot_of(g);
            let hit = if pass_z { w.z(q) } else { w.x(q) };
            if hit {
                w.mul_assign_right(g);
                acc.mul_assign_right(g);
            }
        }
        if w.is_identity_up_to_phase() {
            Some(acc)
        } else {
            None
        }
    }

    /// Some(true) if +p ∈ S, Some(false) if −p ∈ S, None otherwise.
    pub fn contains(&self, p: &PauliString) -> Option<bool> {
        self.find_element(p).map(|e| e.phase() == p.phase())
    }

    fn pivot_of(&self, g: &PauliString) -> (bool, usize) {
        for q in 0..self.n {
            if g.x(q) {
                return (false, q);
            }
        }
        for q in 0..self.n {
            if g.z(q) {
                return (true, q);
            }
        }
        unreachable!("canonical rows are never the identity")
    }

    /// All 2^rank group elements (rank ≤ 20).
    pub fn elements(&self) -> Result<Vec<PauliString>> {
        let mut out = Vec::with_capacity(1 << self.rank().min(ENUM_RANK_CAP));
        self.for_each_element(|p| out.push(p.clone()))?;
        Ok(out)
    }

    /// Gray-code walk over the group (rank ≤ 20).
    pub fn for_each_element<F: FnMut(&PauliString)>(&self, mut f: F) -> Result<()> {
        let k = self.rank();
        if k > ENUM_RANK_CAP {
            return Err(MhError::cap(format!("group enumeration with rank {k}")));
        }
        let mut cur = PauliString::identity(self.n);
        f(&cur);
        for i in 1u64..(1u64 << k) {
            let bit = i.trailing_zeros() as usize;
            cur.mul_assign_right(&self.gens[bit]);
            f(&cur);
        }
        Ok(())
    }

    /// ρ_A = 2^{−|A|} Σ_{σ ∈ S_A} σ as a dense matrix (|A| ≤ 12).
    pub fn reduced_density(&self, a: &Region) -> Result<CMat> {
        if a.len() > 12 {
            return Err(MhError::cap(format!("dense reduced state on {} qubits", a.len())));
        }
        self.restrict(a)?.density()
    }

    /// Dense density matrix of the whole group (n ≤ 12).
    pub fn density(&self) -> Result<CMat> {
        if self.n > 12 {
            return Err(MhError::cap(format!("dense state on {} qubits", self.n)));
        }
        let d = 1usize << self.n;
        let mut m = CMat::zeros(d, d);
        self.for_each_element(|p| {
            for b in 0..d as u64 {
                let (b2, coef) = p.act_on_basis(b);
                m[(b2 as usize, b as usize)] += coef;
            }
        })?;
        Ok(m / c(d as f64, 0.0))
    }

    /// Amplitude vector of a pure stabilizer state (n ≤ 20), global phase
    /// fixed so the first nonzero amplitude is real positive.
    pub fn state_vector(&self) -> Result<Vec<C64>> {
        if !self.is_pure() {
            return Err(MhError::invalid("state vector of a mixed stabilizer state"));
        }
        if self.n > 20 {
            return Err(MhError::cap(format!("state vector on {} qubits", self.n)));
        }
        // The Z-type subgroup fixes a coset of basis states; pick one via the
        // X-free rows, then project.
        let d = 1usize << self.n;
        let mut basis = None;
        for b in 0..d as u64 {
            let ok = self
                .gens
                .iter()
                .filter(|g| g.x_bits().is_zero())
                .all(|g| g.act_on_basis(b).1.re > 0.0);
            if ok {
                basis = Some(b);
                break;
            }
        }
        let b0 = basis.ok_or_else(|| MhError::InvalidGroup("no basis state in support".into()))?;
        let mut psi = vec![c(0.0, 0.0); d];
        psi[b0 as usize] = c(1.0, 0.0);
        for g in &self.gens {
            let mut next = psi.clone();
            for (b, &a) in psi.iter().enumerate() {
                if a == c(0.0, 0.0) {
                    continue;
                }
                let (b2, coef) = g.act_on_basis(b as u64);
                next[b2 as usize] += coef * a;
            }
            psi = next;
        }
        let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let first = psi.iter().find(|a| a.norm() > 1e-12).copied().unwrap_or(c(1.0, 0.0));
        let phase = first.conj() / first.norm();
        Ok(psi.into_iter().map(|a| a * phase / norm).collect())
    }

    /// tr(ρσ) = 2^{−k}, or `None` when the states are orthogonal.
    pub fn overlap_exponent(&self, other: &StabilizerTableau) -> Result<Option<usize>> {
        if self.n != other.n {
            return Err(MhError::Dimension(format!("{} vs {} qubits", self.n, other.n)));
        }
        let rows: Vec<BitVec> = self.gens.iter().chain(&other.gens).map(|g| g.symplectic()).collect();
        let null = left_nullspace(&rows);
        let ks = self.rank();
        for comb in &null {
            let mut ps = PauliString::identity(self.n);
            let mut pt = PauliString::identity(self.n);
            for (i, g) in self.gens.iter().enumerate() {
                if comb.get(i) {
                    ps.mul_assign_right(g);
                }
            }
            for (j, g) in other.gens.iter().enumerate() {
                if comb.get(ks + j) {
                    pt.mul_assign_right(g);
                }
            }
            if ps.phase() != pt.phase() {
                return Ok(None);
            }
        }
        Ok(Some(self.n - null.len()))
    }

    pub fn overlap(&self, other: &StabilizerTableau) -> Result<f64> {
        Ok(match self.overlap_exponent(other)? {
            Some(k) => 0.5f64.powi(k as i32),
            None => 0.0,
        })
    }

    /// Conjugates every generator through the circuit, gate by gate.
    pub fn conjugate_by_clifford(&self, c: &LayeredCircuit) -> Result<StabilizerTableau> {
        if c.n() != self.n {
            return Err(MhError::Dimension(format!("circuit on {} qubits, tableau on {}", c.n(), self.n)));
        }
        c.require_clifford()?;
        let mut rows = self.gens.clone();
        for g in c.gates() {
            for r in rows.iter_mut() {
                conjugate_pauli(r, g)?;
            }
        }
        StabilizerTableau::canonicalize_commuting(self.n, rows)
    }

    /// Tensor product self ⊗ other, with `other` on the higher qubits.
    pub fn tensor(&self, other: &StabilizerTableau) -> StabilizerTableau {
        let n = self.n + other.n;
        let lo: Vec<usize> = (0..self.n).collect();
        let hi: Vec<usize> = (self.n..n).collect();
        let mut rows: Vec<PauliString> = self.gens.iter().map(|g| g.embed(n, &lo)).collect();
        rows.extend(other.gens.iter().map(|g| g.embed(n, &hi)));
        StabilizerTableau::canonicalize_commuting(n, rows).expect("tensor of valid groups is valid")
    }

    /// k = n − rank commuting Paulis that extend the group to a maximal one
    /// (logical Z operators of the code it stabilizes).
    pub fn logical_z(&self) -> Vec<PauliString> {
        let n = self.n;
        // Centralizer: v with x_v·z_g + z_v·x_g = 0 for every generator g.
        let cols: Vec<BitVec> = (0..2 * n)
            .map(|col| {
                let mut v = BitVec::zeros(self.rank());
                for (r, g) in self.gens.iter().enumerate() {
                    let bit = if col < n { g.z(col) } else { g.x(col - n) };
                    v.set(r, bit);
                }
                v
            })
            .collect();
        let centralizer = if self.rank() == 0 {
            (0..2 * n)
                .map(|i| {
                    let mut v = BitVec::zeros(2 * n);
                    v.set(i, true);
                    v
                })
                .collect()
        } else {
            left_nullspace(&cols)
        };
        let mut span = F2Span::new();
        for g in &self.gens {
            span.insert(&g.symplectic());
        }
        let to_pauli = |v: &BitVec| {
            let mut p = PauliString::identity(n);
            for q in 0..n {
                p.set_bits(q, v.get(q), v.get(n + q));
            }
            p
        };
        let mut rest: Vec<PauliString> =
            centralizer.iter().filter(|v| span.insert(v)).map(to_pauli).collect();
        let mut out = Vec::new();
        while !rest.is_empty() {
            let v = rest.remove(0);
            let Some(wi) = rest.iter().position(|w| !w.commutes_unchecked(&v)) else {
                unreachable!("symplectic form is nondegenerate on the centralizer modulo the group")
            };
            let w = rest.remove(wi);
            for u in rest.iter_mut() {
                if !u.commutes_unchecked(&w) {
                    u.mul_assign_right(&v);
                    u.set_phase(0);
                }
                if !u.commutes_unchecked(&v) {
                    u.mul_assign_right(&w);
                    u.set_phase(0);
                }
            }
            out.push(v);
        }
        out
    }

    /// The group extended by `extra` (must commute with it and each other).
    pub fn extended(&self, extra: &[PauliString]) -> Result<StabilizerTableau> {
        let mut rows = self.gens.clone();
        rows.extend_from_slice(extra);
        StabilizerTableau::canonicalize(self.n, &rows)
    }

    /// Elements of weight ≤ ℓ (rank ≤ 20).
    pub fn local_elements(&self, ell: usize) -> Result<Vec<PauliString>> {
        let mut out = Vec::new();
        self.for_each_element(|p| {
            if p.weight() <= ell && !p.is_identity_up_to_phase() {
                out.push(p.clone());
            }
        })?;
        Ok(out)
    }
}

impl fmt::Display for StabilizerTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.gens.iter().map(|g| g.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;
    use crate::linalg::partial_trace;
    use std::collections::HashSet;

    fn t(gens: &[&str]) -> StabilizerTableau {
        StabilizerTableau::from_strs(gens).unwrap()
    }

    #[test]
    fn canonicalization_examples() {
        assert_eq!(t(&["XX", "ZZ"]).rank(), 2);
        let a = t(&["XX", "ZZ", "-YY"]);
        assert_eq!(a.rank(), 2);
        let mut elems: HashSet<String> = HashSet::new();
        a.for_each_element(|p| {
            elems.insert(p.to_string());
        })
        .unwrap();
        let expect: HashSet<String> = ["II", "XX", "ZZ", "-YY"].iter().map(|s| s.to_string()).collect();
        assert_eq!(elems, expect);
        assert!(matches!(StabilizerTableau::from_strs(&["X", "-X"]), Err(MhError::InvalidGroup(_))));
        assert!(matches!(StabilizerTableau::from_strs(&["X", "Z"]), Err(MhError::InvalidGroup(_))));
    }

    #[test]
    fn canonical_form_is_generating_set_invariant() {
        assert_eq!(t(&["XX", "ZZ"]), t(&["-YY", "XX"]));
        assert_eq!(t(&["ZZI", "IZZ"]), t(&["ZIZ", "ZZI"]));
    }

    #[test]
    fn restriction_examples() {
        let bell = t(&["XX", "ZZ"]);
        assert_eq!(bell.restrict(&Region::new(vec![0], 2).unwrap()).unwrap().rank(), 0);
        let ghz4 = t(&["XXXX", "ZZII", "IZZI", "IIZZ"]);
        let r = ghz4.restrict(&Region::new(vec![0, 1], 4).unwrap()).unwrap();
        assert_eq!(r, t(&["ZZ"]));
        assert_eq!(ghz4.restrict(&Region::full(4)).unwrap(), ghz4);
    }

    #[test]
    fn reduced_density_examples() {
        let bell = t(&["XX", "ZZ"]);
        let rho = bell.reduced_density(&Region::new(vec![0], 2).unwrap()).unwrap();
        assert!((rho - CMat::identity(2, 2) * c(0.5, 0.0)).norm() < 1e-12);
        let prod = t(&["ZI", "IX"]);
        let rho = prod.reduced_density(&Region::new(vec![1], 2).unwrap()).unwrap();
        let plus = CMat::from_element(2, 2, c(0.5, 0.0));
        assert!((rho - plus).norm() < 1e-12);
        let ghz3 = t(&["XXX", "ZZI", "IZZ"]);
        let a = Region::new(vec![0, 1], 3).unwrap();
        let rho = ghz3.reduced_density(&a).unwrap();
        let oracle = partial_trace(&ghz3.density().unwrap(), 3, &a).unwrap();
        assert!((rho.clone() - oracle).norm() < 1e-12);
        assert!((rho[(0, 0)].re - 0.5).abs() < 1e-12 && (rho[(3, 3)].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn overlap_examples() {
        let z = StabilizerTableau::zero_state(3);
        assert_eq!(z.overlap(&z).unwrap(), 1.0);
        assert_eq!(t(&["ZI", "IZ"]).overlap(&t(&["XI", "IX"])).unwrap(), 0.25);
        assert_eq!(t(&["Z"]).overlap(&t(&["-Z"])).unwrap(), 0.0);
        let a = t(&["XX", "ZZ"]);
        let b = t(&["ZI", "IZ"]);
        let dense = (a.density().unwrap() * b.density().unwrap()).trace().re;
        assert!((a.overlap(&b).unwrap() - dense).abs() < 1e-12);
    }

    #[test]
    fn clifford_conjugation_examples() {
        let h = parse_circuit("H 0").unwrap();
        assert_eq!(t(&["Z"]).conjugate_by_clifford(&h).unwrap(), t(&["X"]));
        let cx = parse_circuit("CNOT 0 1").unwrap();
        assert_eq!(t(&["XI"]).conjugate_by_clifford(&cx).unwrap(), t(&["XX"]));
        let tc = parse_circuit("T 0").unwrap();
        assert!(matches!(t(&["Z"]).conjugate_by_clifford(&tc), Err(MhError::GateClass(_))));
        let bell = StabilizerTableau::from_circuit(&parse_circuit("H 0 / CNOT 0 1").unwrap()).unwrap();
        assert_eq!(bell, t(&["XX", "ZZ"]));
    }

    #[test]
    fn membership_signs() {
        let ghz = t(&["XXX", "ZZI", "IZZ"]);
        assert_eq!(ghz.contains(&"ZIZ".parse().unwrap()), Some(true));
        assert_eq!(ghz.contains(&"-ZIZ".parse().unwrap()), Some(false));
        assert_eq!(ghz.contains(&"-YYX".parse().unwrap()), Some(true));
        assert_eq!(ghz.contains(&"ZII".parse().unwrap()), None);
    }

    #[test]
    fn logical_completion_reaches_full_rank() {
        for gens in [vec!["XXXX", "ZZZZ"], vec!["ZZI"], vec!["XZ"]] {
            let t = t(&gens);
            let l = t.logical_z();
            assert_eq!(l.len(), t.n() - t.rank());
            assert!(t.extended(&l).unwrap().is_pure());
        }
        assert_eq!(StabilizerTableau::empty(3).logical_z().len(), 3);
    }

    #[test]
    fn state_vector_of_ghz() {
        let psi = t(&["XXX", "ZZI", "IZZ"]).state_vector().unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((psi[0] - c(s, 0.0)).norm() < 1e-12 && (psi[7] - c(s, 0.0)).norm() < 1e-12);
        let psi = t(&["-X"]).state_vector().unwrap();
        assert!((psi[0] - c(s, 0.0)).norm() < 1e-12 && (psi[1] + c(s, 0.0)).norm() < 1e-12);
    }
}
