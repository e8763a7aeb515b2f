//! Packed F2 vectors and matrices.

use serde::{Deserialize, Serialize};

#[inline]
pub fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec { len, words: vec![0; words_for(len)] }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        let m = 1u64 << (i % 64);
        if b {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn dot(&self, other: &BitVec) -> bool {
        let mut acc = 0u32;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= (a & b).count_ones() & 1;
        }
        acc == 1
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &BitVec) -> BitVec {
        let mut v = BitVec::zeros(self.len + other.len);
        for i in 0..self.len {
            v.set(i, self.get(i));
        }
        for i in 0..other.len {
            v.set(self.len + i, other.get(i));
        }
        v
    }
}

/// Basis of the combinations `c` with `Σ c_i rows_i = 0`.
pub fn left_nullspace(rows: &[BitVec]) -> Vec<BitVec> {
    let k = rows.len();
    let mut work: Vec<(BitVec, BitVec)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut t = BitVec::zeros(k);
            t.set(i, true);
            (r.clone(), t)
        })
        .collect();
    let cols = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..k).find(|&r| work[r].0.get(c)) else { continue };
        work.swap(rank, p);
        let (pv, pt) = work[rank].clone();
        for (r, row) in work.iter_mut().enumerate() {
            if r != rank && row.0.get(c) {
                row.0.xor_assign(&pv);
                row.1.xor_assign(&pt);
            }
        }
        rank += 1;
    }
    work.into_iter().skip(rank).map(|(_, t)| t).collect()
}

/// Incrementally built F2 span kept in reduced echelon form.
#[derive(Clone, Debug, Default)]
pub struct F2Span {
    rows: Vec<(usize, BitVec)>,
}

impl F2Span {
    pub fn new() -> Self {
        F2Span::default()
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &BitVec) -> BitVec {
        let mut w = v.clone();
        for (p, r) in &self.rows {
            if w.get(*p) {
                w.xor_assign(r);
            }
        }
        w
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v`; returns false when it was already in the span.
    pub fn insert(&mut self, v: &BitVec) -> bool {
        let w = self.reduce(v);
        let Some(p) = (0..w.len()).find(|&i| w.get(i)) else { return false };
        for (_, r) in self.rows.iter_mut() {
            if r.get(p) {
                r.xor_assign(&w);
            }
        }
        self.rows.push((p, w));
        true
    }
}

/// Dense F2 matrix stored row-wise.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BitVec>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix { rows, cols, data: vec![BitVec::zeros(cols); rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = BitMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, b: bool) {
        self.data[r].set(c, b)
    }

    pub fn row(&self, r: usize) -> &BitVec {
        &self.data[r]
    }

    pub fn column(&self, c: usize) -> BitVec {
        let mut v = BitVec::zeros(self.rows);
        for r in 0..self.rows {
            v.set(r, self.get(r, c));
        }
        v
    }

    pub fn set_column(&mut self, c: usize, v: &BitVec) {
        for r in 0..self.rows {
            self.set(r, c, v.get(r));
        }
    }

    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.cols, "F2 matrix-vector shape mismatch");
        let mut out = BitVec::zeros(self.rows);
        for r in 0..self.rows {
            out.set(r, self.data[r].dot(v));
        }
        out
    }

    pub fn rank(&self) -> usize {
        let mut m = self.data.clone();
        let mut rank = 0;
        for c in 0..self.cols {
            if let Some(p) = (rank..m.len()).find(|&r| m[r].get(c)) {
                m.swap(rank, p);
                let pivot = m[rank].clone();
                for (r, row) in m.iter_mut().enumerate() {
                    if r != rank && row.get(c) {
                        row.xor_assign(&pivot);
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(|r| r.count_ones()).sum()
    }
}
