//! Subsets of a ground set `[n] = {1, ..., n}` stored as bit-vectors.
//!
//! Element `i` lives at bit `i - 1`. Masks are kept normalized (no trailing
//! zero words) so equality and hashing do not depend on the universe size.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

type Words = SmallVec<[u64; 1]>;

/// A finite subset of `[n]` with a cached cardinality.
///
/// The `Ord` impl is the canonical order used everywhere in the crate:
/// cardinality ascending, then numeric mask value ascending.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct SubsetMask {
    words: Words,
    len: u32,
}

impl SubsetMask {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a mask from 1-based elements.
    ///
    /// Panics on element `0`; parsers reject it before reaching here.
    pub fn from_elements<I: IntoIterator<Item = usize>>(elements: I) -> Self {
        let mut mask = Self::empty();
        for e in elements {
            mask.insert(e);
        }
        mask
    }

    pub fn singleton(element: usize) -> Self {
        Self::from_elements([element])
    }

    /// `{1, ..., n}`.
    pub fn full(n: usize) -> Self {
        let mut words: Words = SmallVec::from_elem(u64::MAX, n / 64);
        if n % 64 != 0 {
            words.push((1u64 << (n % 64)) - 1);
        }
        Self::from_words(words)
    }

    /// Interprets bit `i` of `bits` as element `i + 1`.
    pub fn from_bits(bits: u64) -> Self {
        Self::from_words([bits])
    }

    pub fn from_words<I: IntoIterator<Item = u64>>(words: I) -> Self {
        let mut words: Words = words.into_iter().collect();
        while words.last() == Some(&0) {
            words.pop();
        }
        let len = words.iter().map(|w| w.count_ones()).sum();
        Self { words, len }
    }

    /// The mask as a single word, if every element is at most 64.
    pub fn as_u64(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, element: usize) -> bool {
        if element == 0 {
            return false;
        }
        let (w, b) = locate(element);
        self.words.get(w).is_some_and(|word| word >> b & 1 == 1)
    }

    pub fn insert(&mut self, element: usize) {
        assert!(element >= 1, "ground-set elements are 1-based");
        let (w, b) = locate(element);
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        if self.words[w] >> b & 1 == 0 {
            self.words[w] |= 1 << b;
            self.len += 1;
        }
    }

    pub fn remove(&mut self, element: usize) {
        if !self.contains(element) {
            return;
        }
        let (w, b) = locate(element);
        self.words[w] &= !(1 << b);
        self.len -= 1;
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    /// Largest element, or `None` for the empty set.
    pub fn max_element(&self) -> Option<usize> {
        let last = *self.words.last()?;
        Some((self.words.len() - 1) * 64 + (64 - last.leading_zeros() as usize))
    }

    /// True iff every element lies in `[n]`.
    pub fn fits_in(&self, n: usize) -> bool {
        self.max_element().is_none_or(|m| m <= n)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        if self.len > other.len || self.words.len() > other.words.len() {
            return false;
        }
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & b == 0)
    }

    pub fn union(&self, other: &Self) -> Self {
        let (long, short) = if self.words.len() >= other.words.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut words = long.words.clone();
        for (w, s) in words.iter_mut().zip(short.words.iter()) {
            *w |= s;
        }
        Self::from_words(words)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self::from_words(
            self.words
                .iter()
                .zip(other.words.iter())
                .map(|(a, b)| a & b),
        )
    }

    pub fn difference(&self, other: &Self) -> Self {
        Self::from_words(
            self.words
                .iter()
                .enumerate()
                .map(|(i, a)| a & !other.words.get(i).copied().unwrap_or(0)),
        )
    }

    /// Elements in ascending order, 1-based.
    pub fn elements(&self) -> Elements<'_> {
        Elements {
            words: &self.words,
            index: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    /// All subsets of `self`, in no particular order. Only sensible for small sets.
    pub fn subsets(&self) -> impl Iterator<Item = SubsetMask> + '_ {
        let elems: Vec<usize> = self.elements().collect();
        assert!(
            elems.len() < 32,
            "subset enumeration of a {}-element set",
            elems.len()
        );
        (0u32..1 << elems.len()).map(move |pick| {
            SubsetMask::from_elements(
                elems
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| pick >> i & 1 == 1)
                    .map(|(_, &e)| e),
            )
        })
    }

    /// Compares the masks as unsigned integers.
    pub fn cmp_numeric(&self, other: &Self) -> Ordering {
        self.words
            .len()
            .cmp(&other.words.len())
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

fn locate(element: usize) -> (usize, u32) {
    let bit = element - 1;
    (bit / 64, (bit % 64) as u32)
}

impl Ord for SubsetMask {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| self.cmp_numeric(other))
    }
}

impl PartialOrd for SubsetMask {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub struct Elements<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for Elements<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let tz = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.index * 64 + tz + 1);
            }
            self.index += 1;
            self.current = *self.words.get(self.index)?;
        }
    }
}

impl FromIterator<usize> for SubsetMask {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self::from_elements(iter)
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.elements().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for SubsetMask {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.elements())
    }
}

impl<'de> Deserialize<'de> for SubsetMask {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let elems = Vec::<usize>::deserialize(deserializer)?;
        if elems.contains(&0) {
            return Err(serde::de::Error::custom("ground-set elements are 1-based"));
        }
        Ok(Self::from_elements(elems))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn elements_are_one_based() {
        let m = SubsetMask::from_elements([1, 3, 64, 65, 130]);
        assert_eq!(m.len(), 5);
        assert_eq!(m.elements().collect::<Vec<_>>(), vec![1, 3, 64, 65, 130]);
        assert_eq!(m.max_element(), Some(130));
        assert!(m.contains(64) && !m.contains(2) && !m.contains(0));
        assert_eq!(SubsetMask::from_elements([1, 2]).as_u64(), Some(0b11));
    }

    #[test]
    fn canonical_order_is_cardinality_then_value() {
        let a = SubsetMask::from_elements([3]);
        let b = SubsetMask::from_elements([1, 2]);
        let c = SubsetMask::from_elements([1, 3]);
        let d = SubsetMask::from_elements([70]);
        assert!(a < b && b < c);
        assert!(a < d);
        assert!(SubsetMask::empty() < a);
    }

    #[test]
    fn remove_normalizes() {
        let mut m = SubsetMask::from_elements([2, 100]);
        m.remove(100);
        assert_eq!(m, SubsetMask::singleton(2));
        assert_eq!(m.words().len(), 1);
    }

    #[test]
    fn full_mask() {
        assert_eq!(SubsetMask::full(0), SubsetMask::empty());
        assert_eq!(SubsetMask::full(64).len(), 64);
        assert_eq!(SubsetMask::full(70).max_element(), Some(70));
    }

    fn arb_mask() -> impl Strategy<Value = SubsetMask> {
        prop::collection::btree_set(1usize..150, 0..12).prop_map(SubsetMask::from_elements)
    }

    proptest! {
        #[test]
        fn set_algebra_agrees_with_btreeset(a in arb_mask(), b in arb_mask()) {
            use std::collections::BTreeSet;
            let sa: BTreeSet<usize> = a.elements().collect();
            let sb: BTreeSet<usize> = b.elements().collect();
            prop_assert_eq!(a.union(&b).elements().collect::<BTreeSet<_>>(), &sa | &sb);
            prop_assert_eq!(a.intersection(&b).elements().collect::<BTreeSet<_>>(), &sa & &sb);
            prop_assert_eq!(a.difference(&b).elements().collect::<BTreeSet<_>>(), &sa - &sb);
            prop_assert_eq!(a.is_subset(&b), sa.is_subset(&sb));
            prop_assert_eq!(a.is_disjoint(&b), sa.is_disjoint(&sb));
            prop_assert_eq!(a.union(&b).len(), (&sa | &sb).len());
        }
    }
}
