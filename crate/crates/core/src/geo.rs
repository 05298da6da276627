//! Geographic inputs and their projection onto the grid.

use crate::error::{Error, Result};
use crate::world::{Cell, GridWorld, Poi, Tag};

const EARTH_RADIUS_M: f64 = 6_371_008.8;
const M_PER_DEG: f64 = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
    pub time: Option<f64>,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(Error::invalid(format!("coordinate ({lat}, {lon}) out of range")));
        }
        Ok(Self {
            lat,
            lon,
            time: None,
        })
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.time = Some(t);
        self
    }
}

/// A point of interest before rasterization: a single node, or a polygon
/// footprint that is reduced to its vertex centroid.
#[derive(Debug, Clone, PartialEq)]
pub enum PoiGeometry {
    Point(GeoPoint),
    Polygon(Vec<GeoPoint>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeoPoi {
    pub geometry: PoiGeometry,
    pub tag: Tag,
    pub charge: f64,
}

impl GeoPoi {
    pub fn point(at: GeoPoint, tag: Tag, charge: f64) -> Self {
        Self {
            geometry: PoiGeometry::Point(at),
            tag,
            charge,
        }
    }

    /// Representative location: the node itself, or the arithmetic mean of
    /// the polygon vertices.
    pub fn location(&self) -> Option<GeoPoint> {
        match &self.geometry {
            PoiGeometry::Point(p) => Some(*p),
            PoiGeometry::Polygon(v) if v.is_empty() => None,
            PoiGeometry::Polygon(v) => {
                let n = v.len() as f64;
                Some(GeoPoint {
                    lat: v.iter().map(|p| p.lat).sum::<f64>() / n,
                    lon: v.iter().map(|p| p.lon).sum::<f64>() / n,
                    time: None,
                })
            }
        }
    }
}

pub type Polyline = Vec<GeoPoint>;

/// Equirectangular projection about a reference latitude/longitude, with the
/// grid anchored at `(x_min, y_max)` in meters: column grows east, row grows
/// south.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoFrame {
    pub ref_lat: f64,
    pub ref_lon: f64,
    pub x_min: f64,
    pub y_max: f64,
    pub cell_size_m: f64,
}

impl GeoFrame {
    /// Frame for worlds built directly in cell space: cell (0, 0) sits at
    /// latitude/longitude zero.
    pub fn cell_space(cell_size_m: f64) -> Self {
        Self {
            ref_lat: 0.0,
            ref_lon: 0.0,
            x_min: 0.0,
            y_max: 0.0,
            cell_size_m,
        }
    }

    pub fn project(&self, p: &GeoPoint) -> (f64, f64) {
        let x = (p.lon - self.ref_lon) * self.ref_lat.to_radians().cos() * M_PER_DEG;
        let y = (p.lat - self.ref_lat) * M_PER_DEG;
        (x, y)
    }

    /// Continuous (row, col) coordinate of a geographic point.
    pub fn to_grid(&self, p: &GeoPoint) -> (f64, f64) {
        let (x, y) = self.project(p);
        ((self.y_max - y) / self.cell_size_m, (x - self.x_min) / self.cell_size_m)
    }

    /// Nearest cell, or `None` when outside a `rows x cols` grid.
    pub fn to_cell(&self, p: &GeoPoint, rows: usize, cols: usize) -> Option<Cell> {
        let (r, c) = self.to_grid(p);
        let (r, c) = (r.round(), c.round());
        (r >= 0.0 && c >= 0.0 && (r as usize) < rows && (c as usize) < cols)
            .then(|| Cell::new(r as usize, c as usize))
    }

    /// Geographic position of a cell center.
    pub fn to_geo(&self, cell: Cell) -> GeoPoint {
        let x = self.x_min + cell.col as f64 * self.cell_size_m;
        let y = self.y_max - cell.row as f64 * self.cell_size_m;
        GeoPoint {
            lat: self.ref_lat + y / M_PER_DEG,
            lon: self.ref_lon + x / (M_PER_DEG * self.ref_lat.to_radians().cos()),
            time: None,
        }
    }
}

/// Cells visited by an 8-connected Bresenham line from `a` to `b`, inclusive.
pub fn bresenham(a: Cell, b: Cell) -> Vec<Cell> {
    let (mut r, mut c) = (a.row as i64, a.col as i64);
    let (r1, c1) = (b.row as i64, b.col as i64);
    let dr = (r1 - r).abs();
    let dc = (c1 - c).abs();
    let sr = if r < r1 { 1 } else { -1 };
    let sc = if c < c1 { 1 } else { -1 };
    let mut err = dc - dr;
    let mut out = Vec::with_capacity((dr.max(dc) + 1) as usize);
    loop {
        out.push(Cell::new(r as usize, c as usize));
        if r == r1 && c == c1 {
            break;
        }
        let e2 = 2 * err;
        if e2 > -dr {
            err -= dr;
            c += sc;
        }
        if e2 < dc {
            err += dc;
            r += sr;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BuildReport {
    /// POIs outside the road bounding box, or without a location.
    pub dropped_pois: usize,
}

/// Rasterizes road polylines and POIs onto a grid spanning the roads'
/// bounding box and precomputes the attraction fields.
pub fn build_world(
    roads: &[Polyline],
    pois: &[GeoPoi],
    cell_size_m: f64,
) -> Result<(GridWorld, BuildReport)> {
    if !(cell_size_m > 0.0 && cell_size_m.is_finite()) {
        return Err(Error::invalid(format!("cell size {cell_size_m} must be positive")));
    }
    let vertices: Vec<&GeoPoint> = roads.iter().flatten().collect();
    if vertices.is_empty() {
        return Err(Error::NoNavigableCells);
    }
    let (mut lat_lo, mut lat_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut lon_lo, mut lon_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in &vertices {
        lat_lo = lat_lo.min(p.lat);
        lat_hi = lat_hi.max(p.lat);
        lon_lo = lon_lo.min(p.lon);
        lon_hi = lon_hi.max(p.lon);
    }
    if lat_lo == lat_hi && lon_lo == lon_hi {
        return Err(Error::DegenerateBounds);
    }

    let mut frame = GeoFrame {
        ref_lat: 0.5 * (lat_lo + lat_hi),
        ref_lon: 0.5 * (lon_lo + lon_hi),
        x_min: 0.0,
        y_max: 0.0,
        cell_size_m,
    };
    let (x_min, _) = frame.project(&GeoPoint { lat: frame.ref_lat, lon: lon_lo, time: None });
    let (x_max, _) = frame.project(&GeoPoint { lat: frame.ref_lat, lon: lon_hi, time: None });
    let (_, y_min) = frame.project(&GeoPoint { lat: lat_lo, lon: frame.ref_lon, time: None });
    let (_, y_max) = frame.project(&GeoPoint { lat: lat_hi, lon: frame.ref_lon, time: None });
    frame.x_min = x_min;
    frame.y_max = y_max;
    let cols = ((x_max - x_min) / cell_size_m).round() as usize + 1;
    let rows = ((y_max - y_min) / cell_size_m).round() as usize + 1;

    let mut mask = vec![false; rows * cols];
    for line in roads {
        let cells: Vec<Cell> = line
            .iter()
            .filter_map(|p| frame.to_cell(p, rows, cols))
            .collect();
        if cells.len() == 1 {
            mask[cells[0].row * cols + cells[0].col] = true;
        }
        for w in cells.windows(2) {
            for c in bresenham(w[0], w[1]) {
                mask[c.row * cols + c.col] = true;
            }
        }
    }

    let mut report = BuildReport::default();
    let mut grid_pois = Vec::with_capacity(pois.len());
    for poi in pois {
        match poi.location().and_then(|p| frame.to_cell(&p, rows, cols)) {
            Some(position) => grid_pois.push(Poi {
                position,
                tag: poi.tag,
                charge: poi.charge,
            }),
            None => report.dropped_pois += 1,
        }
    }
    if report.dropped_pois > 0 {
        log::warn!("dropped {} POIs outside the road bounding box", report.dropped_pois);
    }
    let world = GridWorld::with_frame(rows, cols, mask, grid_pois, frame)?;
    Ok((world, report))
}
