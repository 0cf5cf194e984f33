//! Fixed-width identifier sets.
//!
//! Node and block identifiers are small integers (< 64), so both neighbour
//! sets and knowledge sets fit in one machine word and intersections are a
//! single AND.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A set of identifiers in `0..64` backed by a `u64`.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct IdSet(u64);

impl IdSet {
    pub const CAPACITY: usize = 64;

    pub const fn empty() -> Self {
        IdSet(0)
    }

    pub const fn from_bits(bits: u64) -> Self {
        IdSet(bits)
    }

    /// All identifiers in `0..n`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= Self::CAPACITY);
        if n >= 64 {
            IdSet(u64::MAX)
        } else {
            IdSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(id: usize) -> Self {
        debug_assert!(id < Self::CAPACITY);
        IdSet(1u64 << id)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, id: usize) -> bool {
        id < Self::CAPACITY && self.0 & (1u64 << id) != 0
    }

    /// Inserts `id`, returning `true` if it was not already present.
    pub fn insert(&mut self, id: usize) -> bool {
        debug_assert!(id < Self::CAPACITY);
        let was = self.contains(id);
        self.0 |= 1u64 << id;
        !was
    }

    pub fn remove(&mut self, id: usize) -> bool {
        let was = self.contains(id);
        self.0 &= !(1u64 << id);
        was
    }

    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn union(self, other: IdSet) -> IdSet {
        IdSet(self.0 | other.0)
    }

    pub const fn intersection(self, other: IdSet) -> IdSet {
        IdSet(self.0 & other.0)
    }

    pub const fn difference(self, other: IdSet) -> IdSet {
        IdSet(self.0 & !other.0)
    }

    pub const fn symmetric_difference(self, other: IdSet) -> IdSet {
        IdSet(self.0 ^ other.0)
    }

    pub const fn is_subset(self, other: IdSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Ascending iteration.
    pub fn iter(self) -> Iter {
        Iter(self.0)
    }

    /// Every non-empty subset of `self`, in ascending order of the
    /// underlying bit pattern.
    pub fn subsets(self) -> Subsets {
        Subsets {
            mask: self.0,
            next: self.0 & self.0.wrapping_neg(),
            done: self.0 == 0,
        }
    }

    /// Lexicographic order of the ascending element sequences.
    pub fn lex_cmp(self, other: IdSet) -> std::cmp::Ordering {
        let (mut a, mut b) = (self.0, other.0);
        loop {
            match (a == 0, b == 0) {
                (true, true) => return std::cmp::Ordering::Equal,
                (true, false) => return std::cmp::Ordering::Less,
                (false, true) => return std::cmp::Ordering::Greater,
                (false, false) => {
                    let (la, lb) = (a.trailing_zeros(), b.trailing_zeros());
                    if la != lb {
                        return la.cmp(&lb);
                    }
                    a &= a - 1;
                    b &= b - 1;
                }
            }
        }
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl FromIterator<usize> for IdSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = IdSet::empty();
        for id in iter {
            s.insert(id);
        }
        s
    }
}

impl IntoIterator for IdSet {
    type Item = usize;
    type IntoIter = Iter;

    fn into_iter(self) -> Iter {
        self.iter()
    }
}

impl fmt::Debug for IdSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for IdSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for IdSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let ids = Vec::<usize>::deserialize(d)?;
        if let Some(bad) = ids.iter().find(|&&id| id >= IdSet::CAPACITY) {
            return Err(serde::de::Error::custom(format!(
                "identifier {bad} exceeds 63"
            )));
        }
        Ok(ids.into_iter().collect())
    }
}

pub struct Iter(u64);

impl Iterator for Iter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let id = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(id)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Iter {}

pub struct Subsets {
    mask: u64,
    next: u64,
    done: bool,
}

impl Iterator for Subsets {
    type Item = IdSet;

    fn next(&mut self) -> Option<IdSet> {
        if self.done {
            return None;
        }
        let cur = self.next;
        if cur == self.mask {
            self.done = true;
        } else {
            // next submask in increasing order
            self.next = (cur.wrapping_sub(self.mask)) & self.mask;
        }
        Some(IdSet(cur))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumerates_every_nonempty_submask_once() {
        let s: IdSet = [1, 4, 6].into_iter().collect();
        let subs: Vec<_> = s.subsets().map(|x| x.bits()).collect();
        assert_eq!(subs.len(), 7);
        let mut sorted = subs.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted, subs);
        assert!(subs.iter().all(|&b| b & !s.bits() == 0 && b != 0));
        assert_eq!(IdSet::empty().subsets().count(), 0);
    }

    #[test]
    fn lex_order_compares_sorted_sequences() {
        let a: IdSet = [0, 5].into_iter().collect();
        let b: IdSet = [1, 2].into_iter().collect();
        assert!(a.lex_cmp(b).is_lt());
        let c: IdSet = [0, 2].into_iter().collect();
        assert!(c.lex_cmp(a).is_lt());
        assert!(a.lex_cmp(a).is_eq());
    }

    #[test]
    fn full_and_singleton() {
        assert_eq!(IdSet::full(3).to_vec(), vec![0, 1, 2]);
        assert_eq!(IdSet::full(64).len(), 64);
        assert!(IdSet::singleton(63).contains(63));
        assert!(!IdSet::singleton(3).contains(64));
    }
}
