//! Per-trajectory features and per-start group metrics.

use std::collections::HashSet;
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::world::{Cell, CellPath};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeatureVector {
    /// Number of time-steps (cells).
    pub total_length: usize,
    /// Mean distance between consecutive one-hot movement vectors.
    pub curliness: f64,
    pub farthest_distance: f64,
    pub end_distance: f64,
    pub middle_distance: f64,
}

impl FeatureVector {
    pub const NAMES: [&'static str; 5] = [
        "total_length",
        "curliness",
        "farthest_distance",
        "end_distance",
        "middle_distance",
    ];

    pub fn as_array(&self) -> [f64; 5] {
        [
            self.total_length as f64,
            self.curliness,
            self.farthest_distance,
            self.end_distance,
            self.middle_distance,
        ]
    }
}

/// Distance between the one-hot encodings of two movement directions.
fn movement_distance(a: usize, b: usize) -> f64 {
    if a == b {
        0.0
    } else {
        SQRT_2
    }
}

/// Features of a contiguous cell path. The middle point is `cells[len / 2]`;
/// all distances are cell-space Euclidean distances from the first cell.
pub fn extract_features(path: &CellPath) -> Result<FeatureVector> {
    let cells = &path.cells;
    if cells.len() < 2 {
        return Err(Error::DegeneratePath);
    }
    let dirs: Vec<usize> = cells
        .windows(2)
        .map(|w| {
            w[0].direction_to(w[1]).ok_or_else(|| {
                Error::invalid(format!("cells {} and {} are not 8-adjacent", w[0], w[1]))
            })
        })
        .collect::<Result<_>>()?;
    let curliness = if dirs.len() < 2 {
        0.0
    } else {
        let sum: f64 = dirs.windows(2).map(|d| movement_distance(d[0], d[1])).sum();
        sum / (dirs.len() - 1) as f64
    };
    let start = cells[0];
    let farthest_distance = cells
        .iter()
        .map(|&c| start.distance(c))
        .fold(0.0, f64::max);
    Ok(FeatureVector {
        total_length: cells.len(),
        curliness,
        farthest_distance,
        end_distance: start.distance(cells[cells.len() - 1]),
        middle_distance: start.distance(cells[cells.len() / 2]),
    })
}

/// Running landscape features of a growing path, updated in O(1) per cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncrementalFeatures {
    start: Cell,
    last: Cell,
    len: u32,
    last_dir: u8,
    turns: u32,
    farthest_sq: u64,
}

const NO_DIR: u8 = u8::MAX;

impl IncrementalFeatures {
    pub fn new(start: Cell) -> Self {
        Self {
            start,
            last: start,
            len: 1,
            last_dir: NO_DIR,
            turns: 0,
            farthest_sq: 0,
        }
    }

    /// State after appending `next`, which must be adjacent to the last cell.
    pub fn extend(&self, next: Cell) -> Self {
        let dir = self
            .last
            .direction_to(next)
            .expect("incremental features require adjacent cells") as u8;
        let turns = self.turns + u32::from(self.last_dir != NO_DIR && self.last_dir != dir);
        let dr = next.row.abs_diff(self.start.row) as u64;
        let dc = next.col.abs_diff(self.start.col) as u64;
        Self {
            start: self.start,
            last: next,
            len: self.len + 1,
            last_dir: dir,
            turns,
            farthest_sq: self.farthest_sq.max(dr * dr + dc * dc),
        }
    }

    pub fn total_length(&self) -> usize {
        self.len as usize
    }

    pub fn curliness(&self) -> f64 {
        let moves = self.len.saturating_sub(1);
        if moves < 2 {
            0.0
        } else {
            self.turns as f64 * SQRT_2 / (moves - 1) as f64
        }
    }

    pub fn farthest_distance(&self) -> f64 {
        (self.farthest_sq as f64).sqrt()
    }

    pub fn end_distance(&self) -> f64 {
        self.start.distance(self.last)
    }
}

/// Diversity of a group of paths sharing a start cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GroupMetrics {
    /// Distinct cells across the whole group.
    pub no_overlapping: usize,
    /// Distinct compass octants of end relative to start (at most 8).
    pub directions: usize,
}

/// Compass octant of the displacement `start -> end`, 0 = N clockwise to
/// 7 = NW, or `None` when the two coincide. Octant `i` spans bearings
/// `(45i - 22.5, 45i + 22.5]`, so a bearing on a boundary falls in the
/// clockwise-earlier octant.
pub fn octant(start: Cell, end: Cell) -> Option<usize> {
    if start == end {
        return None;
    }
    let east = end.col as f64 - start.col as f64;
    let north = start.row as f64 - end.row as f64;
    let bearing = east.atan2(north).to_degrees().rem_euclid(360.0);
    let idx = ((bearing - 22.5) / 45.0).ceil() as i64;
    Some(idx.rem_euclid(8) as usize)
}

pub fn group_metrics(group: &[CellPath]) -> Result<GroupMetrics> {
    let Some(start) = group.first().and_then(CellPath::start) else {
        return Err(Error::invalid("group metrics need a nonempty group"));
    };
    if group.iter().any(|p| p.start() != Some(start)) {
        return Err(Error::invalid("group paths must share a start cell"));
    }
    let cells: HashSet<Cell> = group.iter().flat_map(|p| p.cells.iter().copied()).collect();
    let mut seen = [false; 8];
    for p in group {
        if let Some(o) = p.end().and_then(|e| octant(start, e)) {
            seen[o] = true;
        }
    }
    Ok(GroupMetrics {
        no_overlapping: cells.len(),
        directions: seen.iter().filter(|&&s| s).count(),
    })
}
