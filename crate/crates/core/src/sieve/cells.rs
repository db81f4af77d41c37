//! Dyadic cells `[a/2^l, (a+1)/2^l]` and run-encoded sets of them.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Deepest supported level; cell indices are `u128`.
pub const MAX_LEVEL: u32 = 126;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("dyadic level {0} exceeds the supported maximum {MAX_LEVEL}")]
pub struct LevelOverflow(pub u32);

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicInterval {
    /// Decimal string: indices may exceed what JSON numbers carry exactly.
    #[serde(with = "u128_str")]
    pub a: u128,
    pub level: u32,
}

impl DyadicInterval {
    pub fn new(a: u128, level: u32) -> DyadicInterval {
        assert!(level <= MAX_LEVEL && (level == MAX_LEVEL || a < 1u128 << level));
        DyadicInterval { a, level }
    }

    pub fn lo(&self) -> BigRational {
        BigRational::new(BigInt::from(self.a), BigInt::one() << self.level as usize)
    }

    pub fn hi(&self) -> BigRational {
        BigRational::new(BigInt::from(self.a) + 1, BigInt::one() << self.level as usize)
    }

    pub fn mid(&self) -> BigRational {
        BigRational::new(BigInt::from(self.a) * 2 + 1, BigInt::one() << (self.level as usize + 1))
    }

    /// The ancestor at a coarser level.
    pub fn ancestor(&self, level: u32) -> DyadicInterval {
        assert!(level <= self.level);
        DyadicInterval { a: self.a >> (self.level - level), level }
    }

    pub fn contains(&self, o: &DyadicInterval) -> bool {
        o.level >= self.level && o.ancestor(self.level) == *self
    }
}

/// A union of cells at one common level, stored as disjoint, non-adjacent
/// half-open runs `[start, end)` of cell indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicIntervalSet {
    level: u32,
    runs: BTreeMap<u128, u128>,
    count: u128,
}

fn span(level: u32) -> u128 {
    if level == 128 {
        u128::MAX
    } else {
        1u128 << level
    }
}

impl DyadicIntervalSet {
    pub fn empty(level: u32) -> DyadicIntervalSet {
        assert!(level <= MAX_LEVEL);
        DyadicIntervalSet { level, runs: BTreeMap::new(), count: 0 }
    }

    /// `[0, 1]`.
    pub fn full() -> DyadicIntervalSet {
        let mut s = DyadicIntervalSet::empty(0);
        s.insert_run(0, 1);
        s
    }

    pub fn from_cells(level: u32, cells: impl IntoIterator<Item = u128>) -> DyadicIntervalSet {
        let mut s = DyadicIntervalSet::empty(level);
        for a in cells {
            s.insert_run(a, a + 1);
        }
        s
    }

    pub fn from_runs(level: u32, runs: impl IntoIterator<Item = (u128, u128)>) -> DyadicIntervalSet {
        let mut s = DyadicIntervalSet::empty(level);
        for (a, b) in runs {
            s.insert_run(a, b);
        }
        s
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Number of cells.
    pub fn count(&self) -> u128 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn measure(&self) -> BigRational {
        BigRational::new(BigInt::from(self.count), BigInt::one() << self.level as usize)
    }

    pub fn run_count(&self) -> usize {
        self.runs.len()
    }

    pub fn runs(&self) -> impl Iterator<Item = (u128, u128)> + '_ {
        self.runs.iter().map(|(&a, &b)| (a, b))
    }

    pub fn cells(&self) -> impl Iterator<Item = u128> + '_ {
        self.runs().flat_map(|(a, b)| a..b)
    }

    pub fn first(&self) -> Option<DyadicInterval> {
        self.runs.keys().next().map(|&a| DyadicInterval::new(a, self.level))
    }

    pub fn contains_cell(&self, a: u128) -> bool {
        self.runs.range(..=a).next_back().is_some_and(|(_, &e)| a < e)
    }

    /// Express the set at a finer level; the point set is unchanged.
    pub fn refine_to(&mut self, level: u32) -> Result<(), LevelOverflow> {
        if level > MAX_LEVEL {
            return Err(LevelOverflow(level));
        }
        if level <= self.level {
            return Ok(());
        }
        let k = level - self.level;
        self.runs = self.runs.iter().map(|(&a, &b)| (a << k, b << k)).collect();
        self.count <<= k;
        self.level = level;
        Ok(())
    }

    /// Add `[a, b)`, merging with neighbours.
    pub fn insert_run(&mut self, a: u128, b: u128) {
        assert!(a < b && b <= span(self.level), "run out of range");
        let (mut a, mut b) = (a, b);
        if let Some((&pa, &pb)) = self.runs.range(..=a).next_back() {
            if pb >= a {
                a = pa;
                b = b.max(pb);
                self.runs.remove(&pa);
                self.count -= pb - pa;
            }
        }
        while let Some((&na, &nb)) = self.runs.range(a..).next() {
            if na > b {
                break;
            }
            b = b.max(nb);
            self.runs.remove(&na);
            self.count -= nb - na;
        }
        self.runs.insert(a, b);
        self.count += b - a;
    }

    /// Remove `[a, b)`; returns the number of cells removed.
    pub fn remove_run(&mut self, a: u128, b: u128) -> u128 {
        let mut removed = 0;
        let start = match self.runs.range(..a).next_back() {
            Some((&pa, &pb)) if pb > a => pa,
            _ => a,
        };
        let hit: Vec<(u128, u128)> = self.runs.range(start..b).map(|(&x, &y)| (x, y)).collect();
        for (x, y) in hit {
            self.runs.remove(&x);
            if x < a {
                self.runs.insert(x, a);
            }
            if y > b {
                self.runs.insert(b, y);
            }
            removed += y.min(b) - x.max(a);
        }
        self.count -= removed;
        removed
    }

    /// Cells of `o` expressed at this set's level, which must be at least as
    /// fine as `o`'s.
    fn runs_at(&self, o: &DyadicIntervalSet) -> Vec<(u128, u128)> {
        assert!(o.level <= self.level);
        let k = self.level - o.level;
        o.runs().map(|(a, b)| (a << k, b << k)).collect()
    }

    /// `self \ o`, refining `self` when `o` is finer. Returns the number of
    /// cells removed, counted at the resulting level.
    pub fn subtract(&mut self, o: &DyadicIntervalSet) -> Result<u128, LevelOverflow> {
        self.refine_to(o.level)?;
        let mut removed = 0;
        for (a, b) in self.runs_at(o) {
            removed += self.remove_run(a, b);
        }
        Ok(removed)
    }

    /// Measure of `self ∩ o`, as a cell count at `max(level)`, together with
    /// that level.
    pub fn intersect_count(&self, o: &DyadicIntervalSet) -> (u128, u32) {
        let (fine, coarse) = if self.level >= o.level { (self, o) } else { (o, self) };
        let k = fine.level - coarse.level;
        let mut n = 0;
        for (a, b) in coarse.runs() {
            let (a, b) = (a << k, b << k);
            let start = match fine.runs.range(..a).next_back() {
                Some((&pa, &pb)) if pb > a => pa,
                _ => a,
            };
            for (&x, &y) in fine.runs.range(start..b) {
                n += y.min(b) - x.max(a);
            }
        }
        (n, fine.level)
    }

    pub fn is_subset_of(&self, o: &DyadicIntervalSet) -> bool {
        let (n, l) = self.intersect_count(o);
        n == self.count << (l - self.level)
    }
}

pub mod u128_str {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u128, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u128, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_merges_adjacent_runs() {
        let mut s = DyadicIntervalSet::empty(4);
        s.insert_run(2, 4);
        s.insert_run(6, 8);
        s.insert_run(4, 6);
        assert_eq!(s.runs().collect::<Vec<_>>(), vec![(2, 8)]);
        assert_eq!(s.count(), 6);
    }

    #[test]
    fn remove_splits() {
        let mut s = DyadicIntervalSet::full();
        s.refine_to(3).unwrap();
        assert_eq!(s.remove_run(2, 5), 3);
        assert_eq!(s.runs().collect::<Vec<_>>(), vec![(0, 2), (5, 8)]);
        assert_eq!(s.measure(), BigRational::new(5.into(), 8.into()));
    }

    #[test]
    fn ancestors() {
        let c = DyadicInterval::new(11, 4);
        assert_eq!(c.ancestor(2), DyadicInterval::new(2, 2));
        assert!(DyadicInterval::new(2, 2).contains(&c));
        assert_eq!(c.mid(), BigRational::new(23.into(), 32.into()));
    }
}
