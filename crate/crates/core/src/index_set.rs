//! Sorted sets of observation indices.
//!
//! Every anomaly, candidate set and estimate in the crate is an [`IndexSet`]:
//! a strictly increasing list of indices drawn from a universe `0..n`. The
//! derived ordering compares the index sequences lexicographically, which is
//! the tie-breaking order used by every solver.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexSet {
    indices: Vec<usize>,
    universe: usize,
}

impl IndexSet {
    /// Builds a set from arbitrary indices; duplicates are merged.
    pub fn new(universe: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        indices.sort_unstable();
        indices.dedup();
        if let Some(&last) = indices.last() {
            if last >= universe {
                return Err(Error::IndexOutOfRange {
                    index: last,
                    universe,
                });
            }
        }
        Ok(Self { indices, universe })
    }

    /// Wraps an already sorted, deduplicated, in-range vector.
    pub(crate) fn from_sorted(universe: usize, indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(indices.last().is_none_or(|&i| i < universe));
        Self { indices, universe }
    }

    /// Sorts `indices` in place and wraps them. Indices must be distinct.
    pub(crate) fn from_unsorted(universe: usize, mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        Self::from_sorted(universe, indices)
    }

    pub fn empty(universe: usize) -> Self {
        Self {
            indices: Vec::new(),
            universe,
        }
    }

    pub fn full(universe: usize) -> Self {
        Self {
            indices: (0..universe).collect(),
            universe,
        }
    }

    /// Contiguous run `start..end` (half open).
    pub fn range(universe: usize, start: usize, end: usize) -> Result<Self> {
        if end > universe || start > end {
            return Err(Error::IndexOutOfRange {
                index: end.max(start),
                universe,
            });
        }
        Ok(Self {
            indices: (start..end).collect(),
            universe,
        })
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        let indices = mask
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect();
        Self {
            indices,
            universe: mask.len(),
        }
    }

    pub fn to_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.universe];
        for &i in &self.indices {
            mask[i] = true;
        }
        mask
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn universe_size(&self) -> usize {
        self.universe
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.indices
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn first(&self) -> Option<usize> {
        self.indices.first().copied()
    }

    pub fn last(&self) -> Option<usize> {
        self.indices.last().copied()
    }

    pub fn is_superset(&self, other: &IndexSet) -> bool {
        other.indices.iter().all(|&i| self.contains(i))
    }

    pub fn intersection_len(&self, other: &IndexSet) -> usize {
        let (mut a, mut b) = (self.indices.iter().peekable(), other.indices.iter().peekable());
        let mut count = 0;
        while let (Some(&&x), Some(&&y)) = (a.peek(), b.peek()) {
            match x.cmp(&y) {
                Ordering::Less => {
                    a.next();
                }
                Ordering::Greater => {
                    b.next();
                }
                Ordering::Equal => {
                    count += 1;
                    a.next();
                    b.next();
                }
            }
        }
        count
    }

    pub fn intersection(&self, other: &IndexSet) -> IndexSet {
        self.merge(other, |a, b| a && b)
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        self.merge(other, |a, b| a || b)
    }

    pub fn symmetric_difference(&self, other: &IndexSet) -> IndexSet {
        self.merge(other, |a, b| a != b)
    }

    fn merge(&self, other: &IndexSet, keep: impl Fn(bool, bool) -> bool) -> IndexSet {
        let universe = self.universe.max(other.universe);
        let (xs, ys) = (&self.indices, &other.indices);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < xs.len() || j < ys.len() {
            let (v, in_a, in_b) = match (xs.get(i), ys.get(j)) {
                (Some(&x), Some(&y)) if x == y => {
                    i += 1;
                    j += 1;
                    (x, true, true)
                }
                (Some(&x), Some(&y)) if x < y => {
                    i += 1;
                    (x, true, false)
                }
                (Some(&x), None) => {
                    i += 1;
                    (x, true, false)
                }
                (_, Some(&y)) => {
                    j += 1;
                    (y, false, true)
                }
                (None, None) => unreachable!(),
            };
            if keep(in_a, in_b) {
                out.push(v);
            }
        }
        IndexSet::from_sorted(universe, out)
    }
}

impl PartialOrd for IndexSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for IndexSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.indices
            .cmp(&other.indices)
            .then(self.universe.cmp(&other.universe))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn new_sorts_and_dedups() {
        let s = IndexSet::new(10, [4, 1, 4, 7]).unwrap();
        assert_eq!(s.as_slice(), &[1, 4, 7]);
        assert!(IndexSet::new(3, [3]).is_err());
    }

    #[test]
    fn lexicographic_order_prefers_prefix() {
        let a = IndexSet::new(5, [1, 2]).unwrap();
        let b = IndexSet::new(5, [1, 2, 3]).unwrap();
        let c = IndexSet::new(5, [0, 4]).unwrap();
        assert!(a < b);
        assert!(c < a);
    }

    proptest! {
        #[test]
        fn set_algebra_matches_masks(
            xs in proptest::collection::vec(0usize..40, 0..30),
            ys in proptest::collection::vec(0usize..40, 0..30),
        ) {
            let a = IndexSet::new(40, xs).unwrap();
            let b = IndexSet::new(40, ys).unwrap();
            let (ma, mb) = (a.to_mask(), b.to_mask());
            let expect = |f: fn(bool, bool) -> bool| {
                IndexSet::from_mask(&ma.iter().zip(&mb).map(|(&x, &y)| f(x, y)).collect::<Vec<_>>())
            };
            prop_assert_eq!(a.intersection(&b), expect(|x, y| x && y));
            prop_assert_eq!(a.union(&b), expect(|x, y| x || y));
            prop_assert_eq!(a.symmetric_difference(&b), expect(|x, y| x != y));
            prop_assert_eq!(a.intersection_len(&b), a.intersection(&b).len());
        }
    }
}
