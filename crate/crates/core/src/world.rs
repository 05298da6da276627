//! Rasterized road grid and per-tag attraction fields.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geo::GeoFrame;
use crate::par;

/// Grid coordinate. Row 0 is the northern edge; rows grow southward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    pub fn distance(self, other: Cell) -> f64 {
        let dr = self.row as f64 - other.row as f64;
        let dc = self.col as f64 - other.col as f64;
        dr.hypot(dc)
    }

    /// Whether `other` is one of the 8 cells touching this one by a border or a corner.
    pub fn is_adjacent(self, other: Cell) -> bool {
        let dr = self.row.abs_diff(other.row);
        let dc = self.col.abs_diff(other.col);
        dr <= 1 && dc <= 1 && (dr, dc) != (0, 0)
    }

    /// Cost of a single move to an adjacent cell: 1 orthogonal, sqrt(2) diagonal.
    pub fn step_cost(self, other: Cell) -> f64 {
        if self.row != other.row && self.col != other.col {
            std::f64::consts::SQRT_2
        } else {
            1.0
        }
    }

    /// Index into [`NEIGHBOR_OFFSETS`] of the move `self -> next`.
    pub fn direction_to(self, next: Cell) -> Option<usize> {
        let dr = next.row as i64 - self.row as i64;
        let dc = next.col as i64 - self.col as i64;
        NEIGHBOR_OFFSETS.iter().position(|&o| o == (dr, dc))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Clockwise neighbor template as (d_row, d_col), starting due north:
/// N, NE, E, SE, S, SW, W, NW.
pub const NEIGHBOR_OFFSETS: [(i64, i64); 8] = [
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
];

/// Ordered run of grid cells.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CellPath {
    pub cells: Vec<Cell>,
}

impl CellPath {
    pub fn new(cells: Vec<Cell>) -> Self {
        Self { cells }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn start(&self) -> Option<Cell> {
        self.cells.first().copied()
    }

    pub fn end(&self) -> Option<Cell> {
        self.cells.last().copied()
    }

    /// Sum of per-step costs, accumulated front to back.
    pub fn distance(&self) -> f64 {
        self.cells
            .windows(2)
            .fold(0.0, |acc, w| acc + w[0].step_cost(w[1]))
    }

    /// Checks adjacency of consecutive cells and, when a world is given,
    /// that every cell is a road cell.
    pub fn validate(&self, world: Option<&GridWorld>) -> Result<()> {
        if let Some(w) = self.cells.windows(2).find(|w| !w[0].is_adjacent(w[1])) {
            return Err(Error::invalid(format!(
                "cells {} and {} are not 8-adjacent",
                w[0], w[1]
            )));
        }
        if let Some(world) = world {
            for &c in &self.cells {
                world.check_road(c)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    Building,
    Amenity,
    Natural,
    Office,
    Shop,
    Sport,
}

impl Tag {
    pub const ALL: [Tag; 6] = [
        Tag::Building,
        Tag::Amenity,
        Tag::Natural,
        Tag::Office,
        Tag::Shop,
        Tag::Sport,
    ];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn name(self) -> &'static str {
        match self {
            Tag::Building => "building",
            Tag::Amenity => "amenity",
            Tag::Natural => "natural",
            Tag::Office => "office",
            Tag::Shop => "shop",
            Tag::Sport => "sport",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Tag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Tag::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown tag {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poi {
    pub position: Cell,
    pub tag: Tag,
    /// Attraction magnitude |q|.
    pub charge: f64,
}

/// Per-tag attraction weights, each in `[1, 100]`, ordered as [`Tag::ALL`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierSet([f64; 6]);

impl MultiplierSet {
    pub const MIN: f64 = 1.0;
    pub const MAX: f64 = 100.0;

    pub fn new(values: [f64; 6]) -> Result<Self> {
        if let Some(v) = values
            .iter()
            .find(|v| !(Self::MIN..=Self::MAX).contains(*v))
        {
            return Err(Error::invalid(format!(
                "multiplier {v} outside [{}, {}]",
                Self::MIN,
                Self::MAX
            )));
        }
        Ok(Self(values))
    }

    pub fn uniform() -> Self {
        Self([1.0; 6])
    }

    pub fn values(&self) -> &[f64; 6] {
        &self.0
    }

    pub fn get(&self, tag: Tag) -> f64 {
        self.0[tag.index()]
    }
}

impl Default for MultiplierSet {
    fn default() -> Self {
        Self::uniform()
    }
}

impl fmt::Display for MultiplierSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "<{}>", parts.join(", "))
    }
}

/// Road raster plus six precomputed per-tag attraction rasters.
///
/// Immutable once built. `tag_fields[k][cell]` holds the sum over all POIs of
/// tag `k` of `|q| / d^2`, with `d` the cell-space distance clamped to at
/// least one cell. Fields cover every cell, road or not.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWorld {
    rows: usize,
    cols: usize,
    cell_size_m: f64,
    road_mask: Vec<bool>,
    tag_fields: [Vec<f64>; 6],
    pois: Vec<Poi>,
    frame: GeoFrame,
}

impl GridWorld {
    /// Builds a world from a cell-space road mask (row-major) and POIs,
    /// computing the attraction fields.
    pub fn from_mask(
        rows: usize,
        cols: usize,
        cell_size_m: f64,
        road_mask: Vec<bool>,
        pois: Vec<Poi>,
    ) -> Result<Self> {
        Self::with_frame(rows, cols, road_mask, pois, GeoFrame::cell_space(cell_size_m))
    }

    pub fn with_frame(
        rows: usize,
        cols: usize,
        road_mask: Vec<bool>,
        pois: Vec<Poi>,
        frame: GeoFrame,
    ) -> Result<Self> {
        let cell_size_m = frame.cell_size_m;
        if rows == 0 || cols == 0 {
            return Err(Error::DegenerateBounds);
        }
        if !(cell_size_m > 0.0 && cell_size_m.is_finite()) {
            return Err(Error::invalid(format!("cell size {cell_size_m} must be positive")));
        }
        if road_mask.len() != rows * cols {
            return Err(Error::invalid(format!(
                "road mask has {} cells, expected {}",
                road_mask.len(),
                rows * cols
            )));
        }
        if !road_mask.iter().any(|&r| r) {
            return Err(Error::NoNavigableCells);
        }
        for p in &pois {
            if p.position.row >= rows || p.position.col >= cols {
                return Err(Error::OutOfBounds {
                    row: p.position.row as i64,
                    col: p.position.col as i64,
                    rows,
                    cols,
                });
            }
            if !(p.charge >= 0.0 && p.charge.is_finite()) {
                return Err(Error::invalid(format!("POI charge {} must be >= 0", p.charge)));
            }
        }
        let tag_fields = compute_fields(rows, cols, &pois, true);
        Ok(Self {
            rows,
            cols,
            cell_size_m,
            road_mask,
            tag_fields,
            pois,
            frame,
        })
    }

    /// Reassembles a world from stored parts without recomputing fields.
    pub(crate) fn from_raw_parts(
        rows: usize,
        cols: usize,
        road_mask: Vec<bool>,
        tag_fields: [Vec<f64>; 6],
        pois: Vec<Poi>,
        frame: GeoFrame,
    ) -> Self {
        Self {
            rows,
            cols,
            cell_size_m: frame.cell_size_m,
            road_mask,
            tag_fields,
            pois,
            frame,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell_size_m(&self) -> f64 {
        self.cell_size_m
    }

    pub fn pois(&self) -> &[Poi] {
        &self.pois
    }

    pub fn frame(&self) -> &GeoFrame {
        &self.frame
    }

    pub fn road_mask(&self) -> &[bool] {
        &self.road_mask
    }

    pub fn tag_field(&self, tag: Tag) -> &[f64] {
        &self.tag_fields[tag.index()]
    }

    pub(crate) fn tag_fields(&self) -> &[Vec<f64>; 6] {
        &self.tag_fields
    }

    pub fn index(&self, cell: Cell) -> usize {
        cell.row * self.cols + cell.col
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new(index / self.cols, index % self.cols)
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.row < self.rows && cell.col < self.cols
    }

    pub fn offset(&self, cell: Cell, d_row: i64, d_col: i64) -> Option<Cell> {
        let r = cell.row as i64 + d_row;
        let c = cell.col as i64 + d_col;
        (r >= 0 && c >= 0 && (r as usize) < self.rows && (c as usize) < self.cols)
            .then(|| Cell::new(r as usize, c as usize))
    }

    fn check_bounds(&self, cell: Cell) -> Result<()> {
        if self.in_bounds(cell) {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                row: cell.row as i64,
                col: cell.col as i64,
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn is_road(&self, cell: Cell) -> bool {
        self.in_bounds(cell) && self.road_mask[self.index(cell)]
    }

    pub fn check_road(&self, cell: Cell) -> Result<()> {
        self.check_bounds(cell)?;
        if self.is_road(cell) {
            Ok(())
        } else {
            Err(Error::NotRoad {
                row: cell.row,
                col: cell.col,
            })
        }
    }

    pub fn road_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.road_mask
            .iter()
            .enumerate()
            .filter(|(_, &r)| r)
            .map(|(i, _)| self.cell_at(i))
    }

    pub fn road_count(&self) -> usize {
        self.road_mask.iter().filter(|&&r| r).count()
    }

    /// Per-tag field values at `cell`.
    pub fn fields_at(&self, cell: Cell) -> Result<[f64; 6]> {
        self.check_bounds(cell)?;
        let i = self.index(cell);
        Ok(std::array::from_fn(|k| self.tag_fields[k][i]))
    }

    /// Q = sum_k m[k] * tag_fields[k][cell].
    pub fn attraction(&self, cell: Cell, m: &MultiplierSet) -> Result<f64> {
        self.attraction_weighted(cell, m.values())
    }

    /// [`attraction`](Self::attraction) with arbitrary (unvalidated) weights.
    pub fn attraction_weighted(&self, cell: Cell, weights: &[f64; 6]) -> Result<f64> {
        self.check_bounds(cell)?;
        Ok(self.attraction_at(self.index(cell), weights))
    }

    #[inline]
    pub(crate) fn attraction_at(&self, index: usize, weights: &[f64; 6]) -> f64 {
        let mut q = 0.0;
        for (k, w) in weights.iter().enumerate() {
            q += w * self.tag_fields[k][index];
        }
        q
    }

    /// Maximum attraction over every cell of the grid.
    pub fn max_field_value(&self, m: &MultiplierSet) -> f64 {
        let w = m.values();
        (0..self.rows * self.cols)
            .map(|i| self.attraction_at(i, w))
            .fold(0.0, f64::max)
    }

    /// Road neighbors of `cell`, clockwise from north.
    pub fn neighbors(&self, cell: Cell) -> Vec<Cell> {
        self.road_neighbors(cell).collect()
    }

    pub fn road_neighbors(&self, cell: Cell) -> impl Iterator<Item = Cell> + '_ {
        NEIGHBOR_OFFSETS
            .iter()
            .filter_map(move |&(dr, dc)| self.offset(cell, dr, dc))
            .filter(move |&c| self.road_mask[self.index(c)])
    }

    /// Component labels over road cells (8-connectivity); non-road cells get
    /// `u32::MAX`. Labels are assigned in row-major order of first cell.
    pub fn component_labels(&self) -> Vec<u32> {
        let mut labels = vec![u32::MAX; self.rows * self.cols];
        let mut next = 0u32;
        let mut queue = VecDeque::new();
        for i in 0..labels.len() {
            if !self.road_mask[i] || labels[i] != u32::MAX {
                continue;
            }
            labels[i] = next;
            queue.push_back(self.cell_at(i));
            while let Some(c) = queue.pop_front() {
                for n in self.road_neighbors(c) {
                    let j = self.index(n);
                    if labels[j] == u32::MAX {
                        labels[j] = next;
                        queue.push_back(n);
                    }
                }
            }
            next += 1;
        }
        labels
    }

    /// Road cells of the largest 8-connected component, row-major. Ties go
    /// to the component found first.
    pub fn largest_component(&self) -> Vec<Cell> {
        let labels = self.component_labels();
        let mut sizes: Vec<usize> = Vec::new();
        for &l in labels.iter().filter(|&&l| l != u32::MAX) {
            let l = l as usize;
            if sizes.len() <= l {
                sizes.resize(l + 1, 0);
            }
            sizes[l] += 1;
        }
        let Some(best) = sizes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i as u32)
        else {
            return Vec::new();
        };
        labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == best)
            .map(|(i, _)| self.cell_at(i))
            .collect()
    }
}

/// Coulomb fields, one raster per tag. Each cell sums its tag's POIs in
/// input order so results are identical for any thread count.
pub(crate) fn compute_fields(rows: usize, cols: usize, pois: &[Poi], parallel: bool) -> [Vec<f64>; 6] {
    std::array::from_fn(|k| {
        let sources: Vec<(f64, f64, f64)> = pois
            .iter()
            .filter(|p| p.tag.index() == k)
            .map(|p| (p.position.row as f64, p.position.col as f64, p.charge.abs()))
            .collect();
        let mut field = vec![0.0; rows * cols];
        if sources.is_empty() {
            return field;
        }
        let fill_row = |r: usize, row: &mut [f64]| {
            let rf = r as f64;
            for (c, v) in row.iter_mut().enumerate() {
                let cf = c as f64;
                let mut acc = 0.0;
                for &(pr, pc, q) in &sources {
                    let d2 = ((rf - pr) * (rf - pr) + (cf - pc) * (cf - pc)).max(1.0);
                    acc += q / d2;
                }
                *v = acc;
            }
        };
        if parallel {
            par::fill_chunks(&mut field, cols, fill_row);
        } else {
            par::fill_chunks_sequential(&mut field, cols, fill_row);
        }
        field
    })
}

/// Sequential field computation, exposed for benchmarking against the
/// parallel build.
pub fn compute_fields_sequential(rows: usize, cols: usize, pois: &[Poi]) -> [Vec<f64>; 6] {
    compute_fields(rows, cols, pois, false)
}

/// Parallel (when enabled) field computation.
pub fn compute_fields_parallel(rows: usize, cols: usize, pois: &[Poi]) -> [Vec<f64>; 6] {
    compute_fields(rows, cols, pois, true)
}
