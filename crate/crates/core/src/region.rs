use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{MhError, Result};

/// Strictly increasing list of qubit indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct Region(Vec<usize>);

impl Region {
    /// Sorts the indices; duplicates and out-of-range indices are errors.
    pub fn new(mut qubits: Vec<usize>, n: usize) -> Result<Self> {
        qubits.sort_unstable();
        for w in qubits.windows(2) {
            if w[0] == w[1] {
                return Err(MhError::InvalidRegion(format!("duplicate qubit {}", w[0])));
            }
        }
        if let Some(&q) = qubits.last() {
            if q >= n {
                return Err(MhError::InvalidRegion(format!("qubit {q} out of range for n = {n}")));
            }
        }
        Ok(Region(qubits))
    }

    /// Builds a region from indices already known to be valid; sorts and dedups.
    pub fn from_iter_unchecked<I: IntoIterator<Item = usize>>(it: I) -> Self {
        let mut v: Vec<usize> = it.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Region(v)
    }

    pub fn full(n: usize) -> Self {
        Region((0..n).collect())
    }

    pub fn empty() -> Self {
        Region(Vec::new())
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        Region(mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect())
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &q in &self.0 {
            m[q] = true;
        }
        m
    }

    pub fn check(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&q) if q >= n => Err(MhError::InvalidRegion(format!("qubit {q} out of range for n = {n}"))),
            _ => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn qubits(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, q: usize) -> bool {
        self.0.binary_search(&q).is_ok()
    }

    pub fn position(&self, q: usize) -> Option<usize> {
        self.0.binary_search(&q).ok()
    }

    pub fn union(&self, other: &Region) -> Region {
        Region::from_iter_unchecked(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn intersection(&self, other: &Region) -> Region {
        Region(self.0.iter().copied().filter(|q| other.contains(*q)).collect())
    }

    pub fn difference(&self, other: &Region) -> Region {
        Region(self.0.iter().copied().filter(|q| !other.contains(*q)).collect())
    }

    pub fn is_disjoint(&self, other: &Region) -> bool {
        self.intersection(other).is_empty()
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.0.iter().all(|q| other.contains(*q))
    }

    pub fn complement(&self, n: usize) -> Region {
        Region((0..n).filter(|q| !self.contains(*q)).collect())
    }

    /// Parses `0,5,7` (empty string gives the empty region).
    pub fn parse(text: &str, n: usize) -> Result<Region> {
        let t = text.trim();
        if t.is_empty() {
            return Ok(Region::empty());
        }
        let mut v = Vec::new();
        let index = |x: &str, part: &str| {
            x.trim().parse::<usize>().map_err(|_| MhError::InvalidRegion(format!("bad qubit index '{part}'")))
        };
        for part in t.split(',') {
            match part.split_once('-') {
                Some((lo, hi)) => {
                    let (lo, hi) = (index(lo, part)?, index(hi, part)?);
                    if lo > hi {
                        return Err(MhError::InvalidRegion(format!("empty range '{part}'")));
                    }
                    v.extend(lo..=hi);
                }
                None => v.push(index(part, part)?),
            }
        }
        Region::new(v, n)
    }

    pub fn iter(&self) -> impl Iterator<Item = &usize> {
        self.0.iter()
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|q| q.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl<'a> IntoIterator for &'a Region {
    type Item = &'a usize;
    type IntoIter = std::slice::Iter<'a, usize>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// All subsets of `0..n` of the given size in lexicographic order.
pub fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_sorts_and_rejects_duplicates() {
        assert_eq!(Region::new(vec![3, 1], 4).unwrap().qubits(), &[1, 3]);
        assert!(Region::new(vec![1, 1], 4).is_err());
        assert!(Region::new(vec![4], 4).is_err());
    }

    #[test]
    fn parse_accepts_ranges() {
        assert_eq!(Region::parse("0, 2-4", 6).unwrap().qubits(), &[0, 2, 3, 4]);
        assert!(Region::parse("3-1", 6).is_err());
        assert!(Region::parse("1-2,2", 6).is_err());
        assert!(Region::parse("x", 6).is_err());
    }

    #[test]
    fn subsets_enumeration_counts() {
        assert_eq!(subsets_of_size(5, 2).len(), 10);
        assert_eq!(subsets_of_size(4, 0), vec![Vec::<usize>::new()]);
        assert_eq!(binomial(10, 3), 120);
    }
}
