//! Geometric covering intervals.
//!
//! Level `n` holds the intervals `[i·2^n, (i+1)·2^n − 1]` for `i ≥ 1`, so the
//! first level-`n` interval starts at `2^n` and round `t` lies in exactly one
//! interval of each level `0..=⌊log2 t⌋`. A black box is attached to each
//! interval; the schedule below decides which of them exist for a horizon `T`
//! and which are active in each round.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::Interval;
use crate::error::{Error, Result};

/// `⌊log2 t⌋` for `t ≥ 1`.
#[inline]
pub fn floor_log2(t: usize) -> u32 {
    debug_assert!(t >= 1);
    usize::BITS - 1 - t.leading_zeros()
}

/// One element of the covering: level `n`, index `i ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoveringInterval {
    level: u32,
    index: usize,
}

impl CoveringInterval {
    pub fn new(level: u32, index: usize) -> Result<Self> {
        if index < 1 || level >= usize::BITS - 1 {
            return Err(Error::InvalidInterval {
                start: index,
                end: index,
            });
        }
        Ok(Self { level, index })
    }

    /// Recovers `(n, i)` from the endpoints, or `None` if `[start, end]` is
    /// not a covering interval.
    pub fn from_bounds(start: usize, end: usize) -> Option<Self> {
        if start < 1 || end < start {
            return None;
        }
        let len = end - start + 1;
        if !len.is_power_of_two() || !start.is_multiple_of(len) {
            return None;
        }
        Some(Self {
            level: len.trailing_zeros(),
            index: start / len,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn start(&self) -> usize {
        self.index << self.level
    }

    pub fn end(&self) -> usize {
        ((self.index + 1) << self.level) - 1
    }

    pub fn len(&self) -> usize {
        1 << self.level
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, t: usize) -> bool {
        self.start() <= t && t <= self.end()
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.start(), self.end()).expect("covering intervals are nonempty")
    }
}

impl fmt::Display for CoveringInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start(), self.end())
    }
}

/// The covering intervals containing round `t`, one per level, sorted by level.
pub fn active_intervals(t: usize) -> Result<Vec<CoveringInterval>> {
    if t < 1 {
        return Err(Error::InvalidRound(t));
    }
    Ok((0..=floor_log2(t))
        .map(|level| CoveringInterval {
            level,
            index: t >> level,
        })
        .collect())
}

/// Which covering intervals get a black box for horizon `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoxScope {
    /// Intervals that end by `T` (`J2 ≤ T`). Used by Squint-CE.
    EndWithinHorizon,
    /// Every interval that starts by `T` (`J1 ≤ T`). Intervals starting later
    /// never activate, so this is the whole covering as seen by a run of
    /// length `T`. Used by CBCE.
    StartWithinHorizon,
}

/// Enumeration of the boxes `B` for a horizon together with their active sets.
#[derive(Debug, Clone)]
pub struct CoveringSchedule {
    horizon: usize,
    scope: BoxScope,
    boxes: Vec<CoveringInterval>,
    ids: HashMap<CoveringInterval, usize>,
}

impl CoveringSchedule {
    /// `B = {J : J2 ≤ T}`.
    pub fn enumerate_boxes(horizon: usize) -> Result<Self> {
        Self::with_scope(horizon, BoxScope::EndWithinHorizon)
    }

    pub fn with_scope(horizon: usize, scope: BoxScope) -> Result<Self> {
        if horizon < 1 {
            return Err(Error::InvalidHorizon(horizon));
        }
        let mut boxes = Vec::new();
        for level in 0..=floor_log2(horizon) {
            let len = 1usize << level;
            let mut index = 1;
            loop {
                let j = CoveringInterval { level, index };
                let fits = match scope {
                    BoxScope::EndWithinHorizon => j.end() <= horizon,
                    BoxScope::StartWithinHorizon => j.start() <= horizon,
                };
                if !fits {
                    break;
                }
                boxes.push(j);
                index += 1;
                debug_assert!(index.checked_mul(len).is_some());
            }
        }
        boxes.sort_by_key(|j| (j.start(), j.len()));
        let ids = boxes.iter().enumerate().map(|(i, j)| (*j, i)).collect();
        Ok(Self {
            horizon,
            scope,
            boxes,
            ids,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn scope(&self) -> BoxScope {
        self.scope
    }

    /// All boxes, ordered by start and then by length.
    pub fn boxes(&self) -> &[CoveringInterval] {
        &self.boxes
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn get(&self, id: usize) -> CoveringInterval {
        self.boxes[id]
    }

    pub fn id_of(&self, j: &CoveringInterval) -> Option<usize> {
        self.ids.get(j).copied()
    }

    /// Box ids active at round `t`, sorted by level.
    pub fn active(&self, t: usize) -> Result<Vec<usize>> {
        if t > self.horizon {
            return Err(Error::PastHorizon {
                round: t,
                horizon: self.horizon,
            });
        }
        Ok(active_intervals(t)?
            .iter()
            .filter_map(|j| self.id_of(j))
            .collect())
    }
}

/// Decomposition of an interval into covering intervals whose lengths first
/// at least double and then at least halve.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pieces: Vec<CoveringInterval>,
    /// Number of pieces before the peak piece `J^(0)`.
    c: usize,
}

impl Partition {
    pub fn pieces(&self) -> &[CoveringInterval] {
        &self.pieces
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn d(&self) -> usize {
        self.pieces.len() - self.c - 1
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }
}

/// Greedy construction: from the left, repeatedly take the longest covering
/// interval that starts at the current round and does not pass `b`.
pub fn partition(interval: Interval) -> Partition {
    let end = interval.end();
    let mut pieces = Vec::new();
    let mut pos = interval.start();
    while pos <= end {
        let aligned = pos.trailing_zeros();
        let room = floor_log2(end - pos + 1);
        let level = aligned.min(room);
        let piece = CoveringInterval {
            level,
            index: pos >> level,
        };
        pieces.push(piece);
        pos = piece.end() + 1;
    }
    // J^(0) is the last piece of the leading run in which lengths at least
    // double.
    let mut c = 0;
    while c + 1 < pieces.len() && pieces[c + 1].len() >= 2 * pieces[c].len() {
        c += 1;
    }
    Partition { pieces, c }
}

/// `2·log2(|I| + 2)`, the bound on `c + d + 1`.
pub fn partition_count_bound(interval: Interval) -> f64 {
    2.0 * ((interval.len() + 2) as f64).log2()
}
