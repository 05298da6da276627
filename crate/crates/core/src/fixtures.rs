//! Seeded synthetic towns for tests, benchmarks and the bundled demo data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::geo::{bresenham, GeoFrame, GeoPoi, Polyline};
use crate::world::{Cell, GridWorld, Poi, Tag};

/// Relative tag frequencies, in `Tag::ALL` order.
pub const TAG_WEIGHTS: [f64; 6] = [496_925.0, 29_099.0, 968_541.0, 821.0, 4_637.0, 37_220.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureParams {
    pub rows: usize,
    pub cols: usize,
    pub cell_size_m: f64,
    /// Mean gap between parallel streets, in cells.
    pub street_spacing: usize,
    /// Share of street segments removed to create dead ends.
    pub prune: f64,
    pub diagonals: usize,
    pub pois: usize,
    pub clusters: usize,
    pub cluster_radius: f64,
    pub seed: u64,
}

impl Default for FixtureParams {
    fn default() -> Self {
        Self {
            rows: 300,
            cols: 300,
            cell_size_m: 10.0,
            street_spacing: 10,
            prune: 0.15,
            diagonals: 2,
            pois: 300,
            clusters: 4,
            cluster_radius: 12.0,
            seed: 7,
        }
    }
}

/// A synthetic town in cell coordinates: road polylines (vertex cells)
/// and POIs.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub params: FixtureParams,
    pub roads: Vec<Vec<Cell>>,
    pub pois: Vec<Poi>,
}

impl Fixture {
    pub fn generate(params: FixtureParams) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let (rows, cols) = (params.rows as i64, params.cols as i64);
        let spacing = params.street_spacing.max(3) as i64;
        let mut roads: Vec<Vec<Cell>> = Vec::new();
        let clamp = |v: i64, hi: i64| v.clamp(0, hi - 1) as usize;

        // wiggly streets in both directions, split into prunable segments
        for horizontal in [true, false] {
            let (across, along) = if horizontal { (rows, cols) } else { (cols, rows) };
            let mut base = rng.random_range(1..spacing);
            while base < across - 1 {
                let mut line = Vec::new();
                let mut t = 0;
                while t < along {
                    let off = base + rng.random_range(-1..=1);
                    line.push(if horizontal {
                        Cell::new(clamp(off, rows), clamp(t, cols))
                    } else {
                        Cell::new(clamp(t, rows), clamp(off, cols))
                    });
                    t += rng.random_range(spacing / 2..=spacing * 2).max(2);
                }
                let last = if horizontal {
                    Cell::new(clamp(base, rows), (cols - 1) as usize)
                } else {
                    Cell::new((rows - 1) as usize, clamp(base, cols))
                };
                line.push(last);
                let n = line.len() - 1;
                for (k, seg) in line.windows(2).enumerate() {
                    // border segments stay so the roads span the whole grid
                    if k == 0 || k + 1 == n || !rng.random_bool(params.prune) {
                        roads.push(seg.to_vec());
                    }
                }
                base += rng.random_range(spacing * 3 / 4..=spacing * 5 / 4).max(2);
            }
        }
        for _ in 0..params.diagonals {
            let a = Cell::new(rng.random_range(0..params.rows), 0);
            let b = Cell::new(rng.random_range(0..params.rows), params.cols - 1);
            roads.push(vec![a, b]);
        }

        let centers: Vec<(f64, f64)> = (0..params.clusters)
            .map(|_| (rng.random_range(0.15..0.85) * rows as f64, rng.random_range(0.15..0.85) * cols as f64))
            .collect();
        let spread = Normal::new(0.0, params.cluster_radius.max(1e-9)).expect("positive radius");
        let total: f64 = TAG_WEIGHTS.iter().sum();
        let mut pois = Vec::with_capacity(params.pois);
        for _ in 0..params.pois {
            let (r, c) = if !centers.is_empty() && rng.random_bool(0.7) {
                let (cr, cc) = centers[rng.random_range(0..centers.len())];
                (cr + spread.sample(&mut rng), cc + spread.sample(&mut rng))
            } else {
                (rng.random_range(0.0..rows as f64), rng.random_range(0.0..cols as f64))
            };
            let mut pick = rng.random_range(0.0..total);
            let mut tag = Tag::ALL[5];
            for (t, w) in Tag::ALL.iter().zip(TAG_WEIGHTS) {
                if pick < w {
                    tag = *t;
                    break;
                }
                pick -= w;
            }
            pois.push(Poi {
                position: Cell::new(clamp(r.round() as i64, rows), clamp(c.round() as i64, cols)),
                tag,
                charge: 1.0,
            });
        }
        Self { params, roads, pois }
    }

    pub fn road_mask(&self) -> Vec<bool> {
        let cols = self.params.cols;
        let mut mask = vec![false; self.params.rows * cols];
        for line in &self.roads {
            for w in line.windows(2) {
                for c in bresenham(w[0], w[1]) {
                    mask[c.row * cols + c.col] = true;
                }
            }
        }
        mask
    }

    pub fn world(&self) -> Result<GridWorld> {
        let p = &self.params;
        GridWorld::from_mask(p.rows, p.cols, p.cell_size_m, self.road_mask(), self.pois.clone())
    }

    /// Geographic version centered on `(lat, lon)`. Rebuilding a world
    /// from it reproduces the same grid.
    pub fn to_geo(&self, lat: f64, lon: f64) -> (Vec<Polyline>, Vec<GeoPoi>) {
        let p = &self.params;
        let frame = GeoFrame {
            ref_lat: lat,
            ref_lon: lon,
            x_min: -((p.cols - 1) as f64) * p.cell_size_m / 2.0,
            y_max: (p.rows - 1) as f64 * p.cell_size_m / 2.0,
            cell_size_m: p.cell_size_m,
        };
        let to_geo = |c: Cell| frame.to_geo(c);
        let roads = self
            .roads
            .iter()
            .map(|l| l.iter().map(|&c| to_geo(c)).collect())
            .collect();
        let pois = self
            .pois
            .iter()
            .map(|p| GeoPoi::point(to_geo(p.position), p.tag, p.charge))
            .collect();
        (roads, pois)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::build_world;

    #[test]
    fn fixture_is_deterministic_and_connected() {
        let f = Fixture::generate(FixtureParams::default());
        assert_eq!(f, Fixture::generate(FixtureParams::default()));
        let w = f.world().unwrap();
        let roads = w.road_count();
        assert!(roads > 5000, "{roads} road cells");
        assert!(w.largest_component().len() * 10 >= roads * 9);
        assert_eq!(w.pois().len(), 300);
        let other = Fixture::generate(FixtureParams { seed: 8, ..Default::default() });
        assert_ne!(f.roads, other.roads);
    }

    #[test]
    fn tag_mix_follows_weights() {
        let f = Fixture::generate(FixtureParams { pois: 5000, ..Default::default() });
        let count = |t: Tag| f.pois.iter().filter(|p| p.tag == t).count() as f64;
        let total: f64 = TAG_WEIGHTS.iter().sum();
        for (t, w) in Tag::ALL.iter().zip(TAG_WEIGHTS) {
            let share = w / total;
            assert!((count(*t) / 5000.0 - share).abs() < 0.03, "{t}");
        }
    }

    #[test]
    fn geo_export_rebuilds_same_mask() {
        let p = FixtureParams { rows: 60, cols: 80, pois: 30, ..Default::default() };
        let f = Fixture::generate(p);
        let (roads, pois) = f.to_geo(45.0, 9.0);
        let (w, report) = build_world(&roads, &pois, p.cell_size_m).unwrap();
        let direct = f.world().unwrap();
        assert_eq!(report.dropped_pois, 0);
        assert_eq!((w.rows(), w.cols()), (direct.rows(), direct.cols()));
        assert_eq!(w.road_mask(), direct.road_mask());
    }
}
