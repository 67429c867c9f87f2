//! Fixed-length bit sets used for every materialized subset, T-value and relation.

use std::fmt;

use smallvec::{smallvec, SmallVec};

/// A subset of `0..len`, stored inline for carriers of up to 128 elements.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitSet {
    len: usize,
    words: SmallVec<[u64; 2]>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet {
            len,
            words: smallvec![0; len.div_ceil(64)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = Self::new(len);
        for i in 0..len {
            s.insert(i);
        }
        s
    }

    pub fn singleton(len: usize, i: usize) -> Self {
        let mut s = Self::new(len);
        s.insert(i);
        s
    }

    /// The subset whose members are the set bits of `mask` (requires `len <= 64`).
    pub fn from_mask(len: usize, mask: u64) -> Self {
        assert!(len <= 64, "mask constructor needs len <= 64");
        let mut s = Self::new(len);
        if len > 0 {
            let keep = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
            s.words[0] = mask & keep;
        }
        s
    }

    pub fn from_iter_len(len: usize, items: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::new(len);
        for i in items {
            s.insert(i);
        }
        s
    }

    /// Low word of the set; only meaningful when `len <= 64`.
    pub fn mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        let fresh = !self.contains(i);
        self.words[i / 64] |= 1 << (i % 64);
        fresh
    }

    #[inline]
    pub fn remove(&mut self, i: usize) -> bool {
        let had = self.contains(i);
        if had {
            self.words[i / 64] &= !(1 << (i % 64));
        }
        had
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn union_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a &= !b;
        }
    }

    /// `self |= src << offset`, where `src` must fit inside `self` at that offset.
    pub fn or_shifted(&mut self, src: &BitSet, offset: usize) {
        assert!(offset + src.len <= self.len, "shifted source overruns the target");
        let (q, r) = (offset / 64, offset % 64);
        for (i, &w) in src.words.iter().enumerate() {
            if w == 0 {
                continue;
            }
            self.words[q + i] |= w << r;
            if r != 0 && q + i + 1 < self.words.len() {
                self.words[q + i + 1] |= w >> (64 - r);
            }
        }
    }

    pub fn union(&self, other: &BitSet) -> BitSet {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn intersection(&self, other: &BitSet) -> BitSet {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn is_subset(&self, other: &BitSet) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &BitSet) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & b == 0)
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + t)
                }
            })
        })
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifted_or() {
        for offset in [0, 1, 63, 64, 65, 130] {
            let src = BitSet::from_iter_len(70, [0, 5, 63, 64, 69]);
            let mut dst = BitSet::from_iter_len(210, [offset + 1]);
            dst.or_shifted(&src, offset);
            let want: Vec<usize> = [0, 1, 5, 63, 64, 69].iter().map(|i| i + offset).collect();
            let mut want = want;
            want.sort();
            want.dedup();
            assert_eq!(dst.iter().collect::<Vec<_>>(), want, "offset {offset}");
        }
    }

    #[test]
    fn set_ops() {
        let a = BitSet::from_iter_len(70, [0, 3, 65]);
        let b = BitSet::from_iter_len(70, [3, 69]);
        assert_eq!(a.union(&b).iter().collect::<Vec<_>>(), vec![0, 3, 65, 69]);
        assert_eq!(a.intersection(&b).iter().collect::<Vec<_>>(), vec![3]);
        assert!(!a.is_subset(&b));
        assert!(a.intersection(&b).is_subset(&b));
        assert_eq!(a.count(), 3);
    }

    #[test]
    fn mask_roundtrip() {
        let s = BitSet::from_mask(5, 0b10110);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![1, 2, 4]);
        assert_eq!(s.mask(), 0b10110);
        assert_eq!(BitSet::from_mask(3, u64::MAX).count(), 3);
    }
}
