//! Disjoint unions of open intervals with exact measure arithmetic.

use serde::{Deserialize, Serialize};

/// Open interval `(lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo < hi, "empty or inverted interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }
}

/// Sorted union of pairwise disjoint open intervals.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet::default()
    }

    /// Builds the union of arbitrary open intervals, merging overlaps and
    /// shared endpoints.
    pub fn from_intervals(mut raw: Vec<Interval>) -> Self {
        raw.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("finite endpoints"));
        let mut merged: Vec<Interval> = Vec::with_capacity(raw.len());
        for iv in raw {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => merged.push(iv),
            }
        }
        IntervalSet { intervals: merged }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Total length.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(Interval::length).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.component_of(x).is_some()
    }

    /// Index of the component containing `x`, if any.
    pub fn component_of(&self, x: f64) -> Option<usize> {
        // binary search on left endpoints
        let idx = self.intervals.partition_point(|iv| iv.lo < x);
        if idx == 0 {
            return None;
        }
        let cand = idx - 1;
        if self.intervals[cand].contains(x) {
            Some(cand)
        } else {
            None
        }
    }

    /// Measure of the intersection with the closed interval `[lo, hi]`.
    pub fn measure_within(&self, lo: f64, hi: f64) -> f64 {
        assert!(lo <= hi, "inverted window [{lo}, {hi}]");
        let mut total = 0.0;
        for iv in &self.intervals {
            if iv.hi <= lo {
                continue;
            }
            if iv.lo >= hi {
                break;
            }
            total += iv.hi.min(hi) - iv.lo.max(lo);
        }
        total
    }
}
