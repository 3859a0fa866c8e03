use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Contiguous block of rounds `[start, end]`, 1-based and inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interval {
    start: usize,
    end: usize,
}

impl Interval {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start < 1 || end < start {
            return Err(Error::InvalidInterval { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, t: usize) -> bool {
        self.start <= t && t <= self.end
    }

    pub fn is_within(&self, other: &Interval) -> bool {
        other.start <= self.start && self.end <= other.end
    }

    pub fn rounds(&self) -> std::ops::RangeInclusive<usize> {
        self.start..=self.end
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

/// Every contiguous interval inside `[1, horizon]`, ordered by start then end.
pub fn all_intervals(horizon: usize) -> impl Iterator<Item = Interval> {
    (1..=horizon).flat_map(move |a| (a..=horizon).map(move |b| Interval { start: a, end: b }))
}
