//! Atomic wave measures of a front configuration.

use crate::error::{Error, Result};
use crate::log::{Front, TrajectoryLog};

/// Finite union of disjoint intervals `[a, b)` (or `(a, b)` when open).
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
    open: bool,
}

impl IntervalSet {
    /// Half-open intervals; overlapping pieces are merged.
    pub fn half_open(intervals: &[(f64, f64)]) -> Result<Self> {
        Self::build(intervals, false)
    }

    pub fn open(intervals: &[(f64, f64)]) -> Result<Self> {
        Self::build(intervals, true)
    }

    pub fn single(a: f64, b: f64) -> Self {
        Self::half_open(&[(a, b)]).expect("valid interval")
    }

    fn build(intervals: &[(f64, f64)], open: bool) -> Result<Self> {
        let mut v: Vec<(f64, f64)> = intervals.to_vec();
        if v.iter().any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidInput(format!("intervals need a < b: {:?}", intervals)));
        }
        v.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (a, b) in v {
            match merged.last_mut() {
                // open pieces touching at a point stay apart
                Some(last) if a < last.1 || (!open && a == last.1) => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Ok(IntervalSet { intervals: merged, open })
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_open(&self) -> bool {
        self.open
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| {
            if self.open {
                a < x && x < b
            } else {
                a <= x && x < b
            }
        })
    }
}

/// Atoms `(x_α, σ_α)` of each physical family at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveMeasureSlice {
    pub t: f64,
    /// `atoms[i - 1]` for family `i`, ordered by position.
    pub atoms: Vec<Vec<(f64, f64)>>,
}

impl WaveMeasureSlice {
    pub fn from_fronts(fronts: &[&Front], t: f64, n: usize) -> Self {
        let mut atoms = vec![Vec::new(); n];
        for f in fronts {
            if let Some(k) = f.physical_family() {
                atoms[k - 1].push((f.position(t), f.strength));
            }
        }
        WaveMeasureSlice { t, atoms }
    }

    pub fn from_log(log: &TrajectoryLog, t: f64) -> Self {
        Self::from_fronts(&log.fronts_at(t), t, log.header.n)
    }

    fn sum(&self, i: usize, j: &IntervalSet, w: impl Fn(f64) -> f64) -> f64 {
        self.atoms[i - 1]
            .iter()
            .filter(|(x, _)| j.contains(*x))
            .map(|(_, s)| w(*s))
            .sum()
    }

    /// `μ^{i+}(J)`.
    pub fn positive(&self, i: usize, j: &IntervalSet) -> f64 {
        self.sum(i, j, |s| s.max(0.0))
    }

    /// `μ^{i-}(J)`.
    pub fn negative(&self, i: usize, j: &IntervalSet) -> f64 {
        self.sum(i, j, |s| (-s).max(0.0))
    }

    /// `|μ^i|(J)`.
    pub fn total(&self, i: usize, j: &IntervalSet) -> f64 {
        self.sum(i, j, f64::abs)
    }

    /// `μ^i(J)`.
    pub fn signed(&self, i: usize, j: &IntervalSet) -> f64 {
        self.sum(i, j, |s| s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn merging_and_membership() {
        let j = IntervalSet::half_open(&[(0.0, 1.0), (1.0, 2.0), (3.0, 4.0)]).unwrap();
        assert_eq!(j.intervals(), &[(0.0, 2.0), (3.0, 4.0)]);
        assert!(j.contains(0.0) && !j.contains(2.0));
        assert_eq!(j.measure(), 3.0);
        let o = IntervalSet::open(&[(0.0, 1.0), (1.0, 2.0)]).unwrap();
        assert!(!o.contains(1.0) && !o.contains(0.0));
        assert!(IntervalSet::half_open(&[(1.0, 1.0)]).is_err());
    }

    proptest! {
        #[test]
        fn measures_decompose(
            atoms in proptest::collection::vec((-2.0f64..2.0, -0.3f64..0.3), 0..20),
            cut in -2.0f64..2.0,
        ) {
            let slice = WaveMeasureSlice { t: 0.0, atoms: vec![atoms] };
            let whole = IntervalSet::single(-3.0, 3.0);
            let left = IntervalSet::single(-3.0, cut);
            let right = IntervalSet::single(cut, 3.0);
            let pos = slice.positive(1, &whole);
            let neg = slice.negative(1, &whole);
            prop_assert!((slice.signed(1, &whole) - (pos - neg)).abs() < 1e-12);
            prop_assert!((slice.total(1, &whole) - (pos + neg)).abs() < 1e-12);
            prop_assert!((slice.positive(1, &left) + slice.positive(1, &right) - pos).abs() < 1e-12);
            prop_assert!(slice.positive(1, &left) <= pos + 1e-15);
        }
    }
}
