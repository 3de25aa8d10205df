//! Fixed-universe bit sets.
//!
//! Every subset manipulated by this crate (subsets of a poset, of an
//! algebra's atoms, of a propositional system) is a `BitSet` over a fixed
//! finite universe `0..len`. Exhaustive oracles enumerate `2^n` of these, so
//! the representation stays flat and copy-friendly.

use std::fmt;

const WORD_BITS: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitSet {
    len: usize,
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet {
            len,
            words: vec![0; len.div_ceil(WORD_BITS)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = Self::new(len);
        for i in 0..len {
            s.insert(i);
        }
        s
    }

    pub fn singleton(len: usize, index: usize) -> Self {
        let mut s = Self::new(len);
        s.insert(index);
        s
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, indices: I) -> Self {
        let mut s = Self::new(len);
        for i in indices {
            s.insert(i);
        }
        s
    }

    /// Decodes the low `len` bits of `mask` as a subset; handy for exhaustive
    /// enumeration over all `2^len` subsets when `len <= 64`.
    pub fn from_mask(len: usize, mask: u64) -> Self {
        assert!(len <= 64, "from_mask supports universes up to 64");
        let mut s = Self::new(len);
        if len > 0 {
            let keep = if len == 64 { !0 } else { (1u64 << len) - 1 };
            s.words[0] = mask & keep;
        }
        s
    }

    /// Universe size (not the member count).
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn contains(&self, index: usize) -> bool {
        debug_assert!(index < self.len);
        self.words[index / WORD_BITS] >> (index % WORD_BITS) & 1 == 1
    }

    pub fn insert(&mut self, index: usize) {
        assert!(index < self.len, "bit {index} out of universe {}", self.len);
        self.words[index / WORD_BITS] |= 1 << (index % WORD_BITS);
    }

    pub fn remove(&mut self, index: usize) {
        assert!(index < self.len);
        self.words[index / WORD_BITS] &= !(1 << (index % WORD_BITS));
    }

    pub fn union_with(&mut self, other: &Self) {
        debug_assert_eq!(self.len, other.len);
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w |= o;
        }
    }

    pub fn intersect_with(&mut self, other: &Self) {
        debug_assert_eq!(self.len, other.len);
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w &= o;
        }
    }

    pub fn difference_with(&mut self, other: &Self) {
        debug_assert_eq!(self.len, other.len);
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w &= !o;
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut s = self.clone();
        s.difference_with(other);
        s
    }

    /// Complement within the universe.
    pub fn complement(&self) -> Self {
        let mut s = Self::new(self.len);
        for (i, (w, o)) in s.words.iter_mut().zip(&self.words).enumerate() {
            *w = !o;
            // mask tail bits past the universe
            let hi = self.len.saturating_sub(i * WORD_BITS);
            if hi < WORD_BITS {
                *w &= if hi == 0 { 0 } else { (1u64 << hi) - 1 };
            }
        }
        s
    }

    pub fn intersects(&self, other: &Self) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).any(|(w, o)| w & o != 0)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .all(|(w, o)| w & !o == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.contains(i))
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    /// The low word; only meaningful when the universe fits in 64 bits.
    pub fn as_mask(&self) -> u64 {
        assert!(self.len <= 64);
        self.words.first().copied().unwrap_or(0)
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_respects_universe() {
        let s = BitSet::from_indices(67, [0, 65]);
        let c = s.complement();
        assert_eq!(c.count(), 65);
        assert!(!c.contains(0) && !c.contains(65));
        assert!(c.contains(66));
        assert_eq!(s.union(&c), BitSet::full(67));
        assert!(!s.intersects(&c));
    }

    #[test]
    fn mask_round_trip() {
        for m in 0u64..32 {
            let s = BitSet::from_mask(5, m);
            assert_eq!(s.as_mask(), m);
            assert_eq!(s.count(), m.count_ones() as usize);
        }
    }

    #[test]
    fn subset_and_ops() {
        let a = BitSet::from_indices(10, [1, 3, 5]);
        let b = BitSet::from_indices(10, [1, 3, 5, 7]);
        assert!(a.is_subset(&b));
        assert!(!b.is_subset(&a));
        assert_eq!(b.difference(&a), BitSet::singleton(10, 7));
        assert_eq!(a.intersection(&b), a);
    }
}
