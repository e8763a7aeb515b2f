//! Pauli strings in symplectic form.
//!
//! A string is `i^phase · σ(x_0,z_0) ⊗ … ⊗ σ(x_{n-1},z_{n-1})` with
//! σ(0,0)=I, σ(1,0)=X, σ(0,1)=Z, σ(1,1)=Y. Hermitian strings therefore carry
//! phase 0 or 2.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bits::BitVec;
use crate::error::{MhError, Result};
use crate::region::Region;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    n: usize,
    x: BitVec,
    z: BitVec,
    phase: u8,
}

pub fn i_pow(k: u8) -> Complex64 {
    match k & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { n, x: BitVec::zeros(n), z: BitVec::zeros(n), phase: 0 }
    }

    pub fn from_bits(x: BitVec, z: BitVec, phase: u8) -> Result<Self> {
        if x.len() != z.len() {
            return Err(MhError::Dimension(format!("x has {} bits, z has {}", x.len(), z.len())));
        }
        Ok(PauliString { n: x.len(), x, z, phase: phase & 3 })
    }

    /// Single-qubit Pauli `c` ∈ {I,X,Y,Z} on qubit `q`.
    pub fn single(n: usize, q: usize, c: char) -> Result<Self> {
        if q >= n {
            return Err(MhError::InvalidRegion(format!("qubit {q} out of range for n = {n}")));
        }
        let mut p = PauliString::identity(n);
        p.set_local(q, c)?;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn set_phase(&mut self, phase: u8) {
        self.phase = phase & 3;
    }

    pub fn x_bits(&self) -> &BitVec {
        &self.x
    }

    pub fn z_bits(&self) -> &BitVec {
        &self.z
    }

    #[inline]
    pub fn x(&self, q: usize) -> bool {
        self.x.get(q)
    }

    #[inline]
    pub fn z(&self, q: usize) -> bool {
        self.z.get(q)
    }

    pub fn set_bits(&mut self, q: usize, x: bool, z: bool) {
        self.x.set(q, x);
        self.z.set(q, z);
    }

    pub fn set_local(&mut self, q: usize, c: char) -> Result<()> {
        let (x, z) = match c {
            'I' => (false, false),
            'X' => (true, false),
            'Y' => (true, true),
            'Z' => (false, true),
            _ => return Err(MhError::invalid(format!("unknown Pauli letter '{c}'"))),
        };
        self.set_bits(q, x, z);
        Ok(())
    }

    pub fn local(&self, q: usize) -> char {
        match (self.x(q), self.z(q)) {
            (false, false) => 'I',
            (true, false) => 'X',
            (true, true) => 'Y',
            (false, true) => 'Z',
        }
    }

    pub fn weight(&self) -> usize {
        self.x
            .words()
            .iter()
            .zip(self.z.words())
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn support(&self) -> Region {
        Region::from_iter_unchecked((0..self.n).filter(|&q| self.x(q) || self.z(q)))
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// (x | z) as one vector of length 2n.
    pub fn symplectic(&self) -> BitVec {
        self.x.concat(&self.z)
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// Same Pauli up to phase.
    pub fn same_operator(&self, other: &PauliString) -> bool {
        self.x == other.x && self.z == other.z
    }

    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) & 3;
    }

    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.n != other.n {
            return Err(MhError::Dimension(format!("{} vs {} qubits", self.n, other.n)));
        }
        let mut out = self.clone();
        out.mul_assign_right(other);
        Ok(out)
    }

    /// self ← self · other (lengths must already agree).
    pub fn mul_assign_right(&mut self, other: &PauliString) {
        debug_assert_eq!(self.n, other.n);
        let mut e: i64 = self.phase as i64 + other.phase as i64;
        let xa = self.x.words();
        let za = self.z.words();
        let xb = other.x.words();
        let zb = other.z.words();
        for w in 0..xa.len() {
            e += (xa[w] & za[w]).count_ones() as i64;
            e += (xb[w] & zb[w]).count_ones() as i64;
            e += 2 * (za[w] & xb[w]).count_ones() as i64;
            e -= ((xa[w] ^ xb[w]) & (za[w] ^ zb[w])).count_ones() as i64;
        }
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
        self.phase = e.rem_euclid(4) as u8;
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        if self.n != other.n {
            return Err(MhError::Dimension(format!("{} vs {} qubits", self.n, other.n)));
        }
        Ok(self.commutes_unchecked(other))
    }

    pub fn commutes_unchecked(&self, other: &PauliString) -> bool {
        let mut parity = 0u32;
        let xa = self.x.words();
        let za = self.z.words();
        let xb = other.x.words();
        let zb = other.z.words();
        for w in 0..xa.len() {
            parity ^= ((xa[w] & zb[w]).count_ones() ^ (za[w] & xb[w]).count_ones()) & 1;
        }
        parity == 0
    }

    /// Restriction to the qubits of `a`, keeping the phase.
    pub fn restrict(&self, a: &Region) -> PauliString {
        let mut p = PauliString::identity(a.len());
        for (i, &q) in a.iter().enumerate() {
            p.set_bits(i, self.x(q), self.z(q));
        }
        p.phase = self.phase;
        p
    }

    /// Places this string on the qubits `positions` of an `n`-qubit register.
    pub fn embed(&self, n: usize, positions: &[usize]) -> PauliString {
        assert_eq!(positions.len(), self.n, "embedding length mismatch");
        let mut p = PauliString::identity(n);
        for (i, &q) in positions.iter().enumerate() {
            p.set_bits(q, self.x(i), self.z(i));
        }
        p.phase = self.phase;
        p
    }

    /// Action on a computational basis index: P|b⟩ = coeff·|b ⊕ x⟩ (qubit q ↔ bit q).
    pub fn act_on_basis(&self, b: u64) -> (u64, Complex64) {
        let xm = self.x_mask();
        let zm = self.z_mask();
        let k = self.phase as u32 + (xm & zm).count_ones() + 2 * (zm & b).count_ones();
        (b ^ xm, i_pow((k & 3) as u8))
    }

    /// X bits packed into a u64 (n ≤ 64).
    pub fn x_mask(&self) -> u64 {
        assert!(self.n <= 64, "mask view needs n ≤ 64");
        self.x.words().first().copied().unwrap_or(0)
    }

    pub fn z_mask(&self) -> u64 {
        assert!(self.n <= 64, "mask view needs n ≤ 64");
        self.z.words().first().copied().unwrap_or(0)
    }

    /// Dense 2^n × 2^n matrix (n ≤ 12).
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        if self.n > 12 {
            return Err(MhError::cap(format!("dense Pauli on {} qubits", self.n)));
        }
        let d = 1usize << self.n;
        let mut m = DMatrix::zeros(d, d);
        for b in 0..d as u64 {
            let (b2, c) = self.act_on_basis(b);
            m[(b2 as usize, b as usize)] = c;
        }
        Ok(m)
    }

    // Conjugation primitives: P ← U P U†.

    pub fn conj_h(&mut self, q: usize) {
        let (x, z) = (self.x(q), self.z(q));
        if x && z {
            self.negate();
        }
        self.set_bits(q, z, x);
    }

    pub fn conj_s(&mut self, q: usize) {
        let (x, z) = (self.x(q), self.z(q));
        if x && z {
            self.negate();
        }
        self.set_bits(q, x, z ^ x);
    }

    pub fn conj_sdg(&mut self, q: usize) {
        let (x, z) = (self.x(q), self.z(q));
        if x && !z {
            self.negate();
        }
        self.set_bits(q, x, z ^ x);
    }

    pub fn conj_x(&mut self, q: usize) {
        if self.z(q) {
            self.negate();
        }
    }

    pub fn conj_z(&mut self, q: usize) {
        if self.x(q) {
            self.negate();
        }
    }

    pub fn conj_y(&mut self, q: usize) {
        if self.x(q) ^ self.z(q) {
            self.negate();
        }
    }

    pub fn conj_cnot(&mut self, c: usize, t: usize) {
        let (xc, zc, xt, zt) = (self.x(c), self.z(c), self.x(t), self.z(t));
        if xc && zt && (xt == zc) {
            self.negate();
        }
        self.x.set(t, xt ^ xc);
        self.z.set(c, zc ^ zt);
    }

    pub fn conj_cz(&mut self, a: usize, b: usize) {
        self.conj_h(b);
        self.conj_cnot(a, b);
        self.conj_h(b);
    }

    pub fn conj_swap(&mut self, a: usize, b: usize) {
        let (xa, za, xb, zb) = (self.x(a), self.z(a), self.x(b), self.z(b));
        self.set_bits(a, xb, zb);
        self.set_bits(b, xa, za);
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}")?;
        for q in 0..self.n {
            write!(f, "{}", self.local(q))?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = MhError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (phase, body) = if let Some(r) = t.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = t.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = t.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = t.strip_prefix('-') {
            (2, r)
        } else {
            (0, t)
        };
        let chars: Vec<char> = body.chars().collect();
        if chars.is_empty() {
            return Err(MhError::invalid(format!("empty Pauli string '{s}'")));
        }
        let mut p = PauliString::identity(chars.len());
        for (q, &c) in chars.iter().enumerate() {
            p.set_local(q, c)?;
        }
        p.phase = phase;
        Ok(p)
    }
}

/// Local Pauli index in 0..4^k: two bits per qubit, (x,z) with qubit 0 lowest.
pub fn local_pauli(k: usize, idx: usize) -> PauliString {
    let mut p = PauliString::identity(k);
    for q in 0..k {
        let code = (idx >> (2 * q)) & 3;
        p.set_bits(q, code & 1 == 1, code & 2 == 2);
    }
    p
}

pub fn local_pauli_index(p: &PauliString) -> usize {
    let mut idx = 0;
    for q in 0..p.n() {
        idx |= ((p.x(q) as usize) | ((p.z(q) as usize) << 1)) << (2 * q);
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_products() {
        assert_eq!(p("X").mul(&p("Z")).unwrap(), p("-iY"));
        assert_eq!(p("Z").mul(&p("X")).unwrap(), p("+iY"));
        assert_eq!(p("IX").mul(&p("IX")).unwrap(), p("II"));
        assert_eq!(p("XX").mul(&p("ZZ")).unwrap(), p("-YY"));
    }

    #[test]
    fn products_match_dense_matrices() {
        let letters = ["I", "X", "Y", "Z"];
        for a in letters {
            for b in letters {
                for c in letters {
                    for d in letters {
                        let pa = p(&format!("{a}{b}"));
                        let pb = p(&format!("-i{c}{d}"));
                        let prod = pa.mul(&pb).unwrap().to_dense().unwrap();
                        let dense = pa.to_dense().unwrap() * pb.to_dense().unwrap();
                        assert!((prod - dense).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn commutation_examples() {
        assert!(!p("X").commutes(&p("Z")).unwrap());
        assert!(p("XZ").commutes(&p("ZX")).unwrap());
        assert!(p("XXXX").commutes(&p("ZZII")).unwrap());
        assert!(p("X").commutes(&p("ZZ")).is_err());
    }

    #[test]
    fn parse_display_roundtrip() {
        for s in ["-iXYZI", "+iZ", "-XX", "IYI"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert_eq!(p("+XZ").to_string(), "XZ");
        assert!("XQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn conjugation_tables_match_dense() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0].map(|v| Complex64::new(v / 2f64.sqrt(), 0.0)));
        let s = DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)],
        );
        for l in ["X", "Y", "Z"] {
            let mut q = p(l);
            q.conj_h(0);
            let want = &h * p(l).to_dense().unwrap() * h.adjoint();
            assert!((q.to_dense().unwrap() - want).norm() < 1e-12, "H on {l}");
            let mut q = p(l);
            q.conj_s(0);
            let want = &s * p(l).to_dense().unwrap() * s.adjoint();
            assert!((q.to_dense().unwrap() - want).norm() < 1e-12, "S on {l}");
            let mut q = p(l);
            q.conj_sdg(0);
            let want = s.adjoint() * p(l).to_dense().unwrap() * &s;
            assert!((q.to_dense().unwrap() - want).norm() < 1e-12, "Sdg on {l}");
        }
        // CNOT with control 0 (bit 0), target 1 (bit 1).
        let mut cnot = DMatrix::<Complex64>::zeros(4, 4);
        for b in 0..4usize {
            let out = if b & 1 == 1 { b ^ 2 } else { b };
            cnot[(out, b)] = Complex64::new(1.0, 0.0);
        }
        for a in ["I", "X", "Y", "Z"] {
            for b in ["I", "X", "Y", "Z"] {
                let s0 = format!("{a}{b}");
                let mut q = p(&s0);
                q.conj_cnot(0, 1);
                let want = &cnot * p(&s0).to_dense().unwrap() * cnot.adjoint();
                assert!((q.to_dense().unwrap() - want).norm() < 1e-12, "CNOT on {s0}");
            }
        }
    }

    #[test]
    fn local_index_roundtrip() {
        for idx in 0..16 {
            assert_eq!(local_pauli_index(&local_pauli(2, idx)), idx);
        }
    }
}
