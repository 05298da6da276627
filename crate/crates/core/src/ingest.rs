//! Text inputs (POIs, roads, trajectories), map matching of real
//! trajectories, and the synthetic stand-in corpus.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use crate::error::{Error, Result};
use crate::geo::{GeoPoi, GeoPoint, Polyline};
use crate::planner::{shortest_path, splitmix64};
use crate::world::{Cell, CellPath, GridWorld, Tag, NEIGHBOR_OFFSETS};

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

fn parse_f64(field: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("bad {what} {:?}", field.trim())))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite {what}")));
    }
    Ok(v)
}

fn parse_point(lat: &str, lon: &str, line: usize) -> Result<GeoPoint> {
    let lat = parse_f64(lat, line, "latitude")?;
    let lon = parse_f64(lon, line, "longitude")?;
    GeoPoint::new(lat, lon).map_err(|e| Error::parse(line, e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PoiLoad {
    pub pois: Vec<GeoPoi>,
    /// Records whose tag is not one of the six families.
    pub rejected: usize,
}

/// Parses `lat,lon,tag[,charge]` records. A first line whose first field
/// is not numeric is treated as a header.
pub fn parse_pois(text: &str) -> Result<PoiLoad> {
    let mut out = PoiLoad::default();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if i == 0 && fields[0].trim().parse::<f64>().is_err() {
            continue;
        }
        if !(3..=4).contains(&fields.len()) {
            return Err(Error::parse(line_no, "expected lat,lon,tag[,charge]"));
        }
        let at = parse_point(fields[0], fields[1], line_no)?;
        let charge = match fields.get(3) {
            Some(c) => parse_f64(c, line_no, "charge")?,
            None => 1.0,
        };
        match fields[2].parse::<Tag>() {
            Ok(tag) => out.pois.push(GeoPoi::point(at, tag, charge)),
            Err(_) => {
                log::debug!("line {line_no}: rejected tag {:?}", fields[2].trim());
                out.rejected += 1;
            }
        }
    }
    Ok(out)
}

pub fn load_pois(path: &Path) -> Result<PoiLoad> {
    parse_pois(&read(path)?)
}

/// Parses one polyline per line: `lat1,lon1;lat2,lon2;...`.
pub fn parse_roads(text: &str) -> Result<Vec<Polyline>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let pts = line
            .split(';')
            .map(|p| match p.split_once(',') {
                Some((lat, lon)) => parse_point(lat, lon, i + 1),
                None => Err(Error::parse(i + 1, "expected lat,lon")),
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(pts);
    }
    Ok(out)
}

pub fn load_roads(path: &Path) -> Result<Vec<Polyline>> {
    parse_roads(&read(path)?)
}

pub fn write_roads<W: Write>(roads: &[Polyline], mut out: W) -> Result<()> {
    for line in roads {
        let parts: Vec<String> = line.iter().map(|p| format!("{},{}", p.lat, p.lon)).collect();
        writeln!(out, "{}", parts.join(";"))?;
    }
    Ok(())
}

pub fn write_pois<W: Write>(pois: &[GeoPoi], mut out: W) -> Result<()> {
    writeln!(out, "lat,lon,tag,charge")?;
    for p in pois {
        let at = p.location().ok_or_else(|| Error::invalid("POI without location"))?;
        writeln!(out, "{},{},{},{}", at.lat, at.lon, p.tag, p.charge)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawTrajectory {
    pub id: String,
    pub points: Vec<GeoPoint>,
}

impl RawTrajectory {
    pub fn new(id: impl Into<String>, points: Vec<GeoPoint>) -> Result<Self> {
        let id = id.into();
        if id.contains('|') || id.contains('\n') {
            return Err(Error::invalid(format!("trajectory id {id:?} contains a separator")));
        }
        if points.len() < 2 {
            return Err(Error::invalid(format!("trajectory {id:?} needs at least 2 points")));
        }
        let times: Vec<f64> = points.iter().filter_map(|p| p.time).collect();
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid(format!("trajectory {id:?} has decreasing timestamps")));
        }
        Ok(Self { id, points })
    }
}

/// Parses `id|lat,lon[,t];lat,lon[,t];...`, one trajectory per line.
pub fn parse_trajectories(text: &str) -> Result<Vec<RawTrajectory>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (id, body) = line
            .split_once('|')
            .ok_or_else(|| Error::parse(line_no, "expected id|points"))?;
        let points = body
            .split(';')
            .map(|p| {
                let f: Vec<&str> = p.split(',').collect();
                match f.len() {
                    2 => parse_point(f[0], f[1], line_no),
                    3 => Ok(parse_point(f[0], f[1], line_no)?.with_time(parse_f64(f[2], line_no, "time")?)),
                    _ => Err(Error::parse(line_no, "expected lat,lon[,t]")),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(RawTrajectory::new(id.trim(), points).map_err(|e| Error::parse(line_no, e.to_string()))?);
    }
    Ok(out)
}

pub fn load_trajectories(path: &Path) -> Result<Vec<RawTrajectory>> {
    parse_trajectories(&read(path)?)
}

pub fn format_trajectory(t: &RawTrajectory) -> String {
    let mut s = format!("{}|", t.id);
    for (k, p) in t.points.iter().enumerate() {
        if k > 0 {
            s.push(';');
        }
        let _ = write!(s, "{},{}", p.lat, p.lon);
        if let Some(time) = p.time {
            let _ = write!(s, ",{time}");
        }
    }
    s
}

pub fn write_trajectories<W: Write>(trajectories: &[RawTrajectory], mut out: W) -> Result<()> {
    for t in trajectories {
        writeln!(out, "{}", format_trajectory(t))?;
    }
    Ok(())
}

/// Closest road cell to a continuous `(row, col)` position by Euclidean
/// distance, ties going to the lowest row and then the lowest column.
/// Searches square rings outward from the rounded position.
pub fn nearest_road_cell(world: &GridWorld, row: f64, col: f64) -> Option<Cell> {
    let (rows, cols) = (world.rows() as i64, world.cols() as i64);
    let r0 = (row.round() as i64).clamp(0, rows - 1);
    let c0 = (col.round() as i64).clamp(0, cols - 1);
    // distance from the query to the clamped center bounds the ring lower bound
    let slack = ((row - r0 as f64).powi(2) + (col - c0 as f64).powi(2)).sqrt();
    let mut best: Option<(f64, Cell)> = None;
    let max_k = rows.max(cols);
    for k in 0..=max_k {
        if let Some((d, _)) = best {
            if (k as f64 - slack).max(0.0) > d.sqrt() {
                break;
            }
        }
        for r in (r0 - k)..=(r0 + k) {
            if r < 0 || r >= rows {
                continue;
            }
            let edge = r == r0 - k || r == r0 + k;
            let step = if edge || k == 0 { 1 } else { 2 * k as usize };
            for c in ((c0 - k)..=(c0 + k)).step_by(step.max(1)) {
                if c < 0 || c >= cols {
                    continue;
                }
                let cell = Cell::new(r as usize, c as usize);
                if !world.is_road(cell) {
                    continue;
                }
                let d = (r as f64 - row).powi(2) + (c as f64 - col).powi(2);
                let better = match best {
                    None => true,
                    Some((bd, bc)) => d < bd || (d == bd && (cell.row, cell.col) < (bc.row, bc.col)),
                };
                if better {
                    best = Some((d, cell));
                }
            }
        }
    }
    best.map(|(_, c)| c)
}

/// Projects each GPS point to its nearest road cell and stitches
/// consecutive cells with shortest grid paths, sharing junction cells.
pub fn map_real_trajectory(world: &GridWorld, t: &RawTrajectory) -> Result<CellPath> {
    let frame = world.frame();
    let mut anchors = Vec::with_capacity(t.points.len());
    for p in &t.points {
        let (r, c) = frame.to_grid(p);
        let (rr, cc) = (r.round(), c.round());
        if rr < 0.0 || cc < 0.0 || rr >= world.rows() as f64 || cc >= world.cols() as f64 {
            return Err(Error::OutOfBounds {
                row: rr as i64,
                col: cc as i64,
                rows: world.rows(),
                cols: world.cols(),
            });
        }
        anchors.push(nearest_road_cell(world, r, c).ok_or(Error::NoNavigableCells)?);
    }
    map_cells(world, &anchors)
}

/// Stitches a sequence of road cells into a contiguous path.
pub fn map_cells(world: &GridWorld, anchors: &[Cell]) -> Result<CellPath> {
    let Some(&first) = anchors.first() else {
        return Err(Error::DegeneratePath);
    };
    world.check_road(first)?;
    let mut cells = vec![first];
    for (i, w) in anchors.windows(2).enumerate() {
        if w[0] == w[1] {
            continue;
        }
        match shortest_path(world, w[0], w[1])? {
            Some((seg, _)) => cells.extend_from_slice(&seg.cells[1..]),
            None => return Err(Error::Unreachable { from: i, to: i + 1 }),
        }
    }
    Ok(CellPath::new(cells))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusParams {
    pub mean_steps: f64,
    /// Coefficient of variation of the step count.
    pub cv: f64,
    /// Probability of keeping the current heading when it is open.
    pub momentum: f64,
    pub max_retries: usize,
}

impl Default for CorpusParams {
    fn default() -> Self {
        Self {
            mean_steps: 200.0,
            cv: 0.9,
            momentum: 0.8,
            max_retries: 32,
        }
    }
}

/// `n` momentum-biased random walks from cells of the largest road
/// component. Walk `i` uses its own stream derived from `(seed, i)`.
pub fn synth_corpus(world: &GridWorld, n: usize, seed: u64, params: &CorpusParams) -> Result<Vec<CellPath>> {
    if n == 0 {
        return Err(Error::invalid("corpus size must be at least 1"));
    }
    if !(params.mean_steps >= 1.0 && params.cv > 0.0 && (0.0..=1.0).contains(&params.momentum)) {
        return Err(Error::invalid("bad corpus parameters"));
    }
    let component = world.largest_component();
    if component.len() < 2 {
        return Err(Error::NoNavigableCells);
    }
    let s2 = (1.0 + params.cv * params.cv).ln();
    let steps = LogNormal::new(params.mean_steps.ln() - s2 / 2.0, s2.sqrt())
        .map_err(|e| Error::invalid(e.to_string()))?;
    (0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(i as u64)));
            for _ in 0..=params.max_retries {
                let len = (steps.sample(&mut rng).round() as usize).max(1);
                let start = component[rng.random_range(0..component.len())];
                if let Some(p) = walk(world, start, len, params.momentum, &mut rng) {
                    return Ok(p);
                }
            }
            Err(Error::invalid(format!("corpus walk {i} trapped after {} retries", params.max_retries)))
        })
        .collect()
}

/// Random walk of `steps` moves that avoids immediate reversal unless
/// cornered. Returns `None` when the start has no road neighbor.
fn walk(world: &GridWorld, start: Cell, steps: usize, momentum: f64, rng: &mut ChaCha8Rng) -> Option<CellPath> {
    let mut cells = Vec::with_capacity(steps + 1);
    cells.push(start);
    let mut heading: Option<usize> = None;
    let mut cur = start;
    let mut open: Vec<usize> = Vec::with_capacity(8);
    for _ in 0..steps {
        open.clear();
        open.extend((0..8).filter(|&d| {
            let (dr, dc) = NEIGHBOR_OFFSETS[d];
            world.offset(cur, dr, dc).is_some_and(|c| world.is_road(c))
        }));
        if open.is_empty() {
            return None;
        }
        let d = match heading {
            Some(h) if open.contains(&h) && rng.random_bool(momentum) => h,
            _ => {
                let reverse = heading.map(|h| (h + 4) % 8);
                let forward: Vec<usize> = open.iter().copied().filter(|&d| Some(d) != reverse).collect();
                let pool = if forward.is_empty() { &open } else { &forward };
                pool[rng.random_range(0..pool.len())]
            }
        };
        let (dr, dc) = NEIGHBOR_OFFSETS[d];
        cur = world.offset(cur, dr, dc).expect("open directions stay in bounds");
        cells.push(cur);
        heading = Some(d);
    }
    Some(CellPath::new(cells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::GeoFrame;

    fn grid(rows: usize, cols: usize, road: impl Fn(usize, usize) -> bool) -> GridWorld {
        let mask = (0..rows * cols).map(|i| road(i / cols, i % cols)).collect();
        GridWorld::from_mask(rows, cols, 10.0, mask, vec![]).unwrap()
    }

    #[test]
    fn poi_examples() {
        let text = "lat,lon,tag,charge\n45.0,9.0,natural\n45.1,9.1,Shop,2.5\n45.2,9.2,sport,1\n";
        let l = parse_pois(text).unwrap();
        assert_eq!(l.pois.len(), 3);
        assert_eq!(l.pois.iter().map(|p| p.tag).collect::<Vec<_>>(), [Tag::Natural, Tag::Shop, Tag::Sport]);
        assert_eq!(l.pois[0].charge, 1.0);
        assert_eq!(l.pois[1].charge, 2.5);
        assert_eq!(l.rejected, 0);

        let l = parse_pois("45.0,9.0,restaurant\n45.0,9.0,office\n").unwrap();
        assert_eq!((l.pois.len(), l.rejected), (1, 1));

        match parse_pois("45.0,9.0,shop\n45.0,abc,shop\n") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_pois("45.0,9.0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_pois("95.0,9.0,shop\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn poi_round_trip() {
        let pois: Vec<GeoPoi> = Tag::ALL
            .iter()
            .enumerate()
            .map(|(i, &t)| GeoPoi::point(GeoPoint::new(45.0 + i as f64 * 0.001, 9.123456789).unwrap(), t, 1.0 + i as f64))
            .collect();
        let mut buf = Vec::new();
        write_pois(&pois, &mut buf).unwrap();
        let back = parse_pois(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.pois, pois);
    }

    #[test]
    fn roads_and_trajectories_round_trip() {
        let roads = parse_roads("45.0,9.0;45.001,9.0\n\n45.0,9.0;45.0,9.002;45.001,9.002\n").unwrap();
        assert_eq!(roads.len(), 2);
        assert_eq!(roads[1].len(), 3);
        let mut buf = Vec::new();
        write_roads(&roads, &mut buf).unwrap();
        assert_eq!(parse_roads(std::str::from_utf8(&buf).unwrap()).unwrap(), roads);
        assert!(matches!(parse_roads("45.0;9.0\n"), Err(Error::Parse { line: 1, .. })));

        let text = "a|45.5,9.25,0;45.001,9.001,5.5\nb|45.5,9.25;45.1,9.1;45.2,9.2\n";
        let ts = parse_trajectories(text).unwrap();
        assert_eq!(ts.len(), 2);
        assert_eq!(ts[0].points[1].time, Some(5.5));
        let mut buf = Vec::new();
        write_trajectories(&ts, &mut buf).unwrap();
        assert_eq!(std::str::from_utf8(&buf).unwrap(), text);
        assert!(parse_trajectories("c|45.0,9.0\n").is_err());
        assert!(parse_trajectories("d|45.0,9.0,5;45.0,9.0,4\n").is_err());
    }

    #[test]
    fn nearest_cell_tie_break() {
        let w = grid(5, 5, |r, c| (r, c) == (1, 2) || (r, c) == (3, 2) || (r, c) == (2, 1));
        // (2, 2) is equidistant from three road cells: lowest row wins
        assert_eq!(nearest_road_cell(&w, 2.0, 2.0), Some(Cell::new(1, 2)));
        assert_eq!(nearest_road_cell(&w, 2.4, 1.6), Some(Cell::new(2, 1)));
        let w = grid(3, 3, |r, c| (r, c) == (1, 0) || (r, c) == (1, 2));
        assert_eq!(nearest_road_cell(&w, 1.0, 1.0), Some(Cell::new(1, 0)));
    }

    #[test]
    fn nearest_cell_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let density = rng.random_range(0.01..0.5);
            let mask: Vec<bool> = (0..30 * 40).map(|_| rng.random_bool(density)).collect();
            if !mask.iter().any(|&b| b) {
                continue;
            }
            let w = GridWorld::from_mask(30, 40, 1.0, mask, vec![]).unwrap();
            for _ in 0..20 {
                let (r, c) = (rng.random_range(-0.49..29.49), rng.random_range(-0.49..39.49));
                let brute = w
                    .road_cells()
                    .min_by(|a, b| {
                        let da = (a.row as f64 - r).powi(2) + (a.col as f64 - c).powi(2);
                        let db = (b.row as f64 - r).powi(2) + (b.col as f64 - c).powi(2);
                        da.total_cmp(&db).then((a.row, a.col).cmp(&(b.row, b.col)))
                    })
                    .unwrap();
                assert_eq!(nearest_road_cell(&w, r, c), Some(brute));
            }
        }
    }

    fn geo_traj(w: &GridWorld, cells: &[Cell]) -> RawTrajectory {
        RawTrajectory::new("t", cells.iter().map(|&c| w.frame().to_geo(c)).collect()).unwrap()
    }

    #[test]
    fn straight_road_mapping() {
        let w = grid(3, 20, |r, _| r == 1);
        let t = geo_traj(&w, &[Cell::new(1, 2), Cell::new(1, 7)]);
        let p = map_real_trajectory(&w, &t).unwrap();
        assert_eq!(p.cells, (2..=7).map(|c| Cell::new(1, c)).collect::<Vec<_>>());

        let t = geo_traj(&w, &[Cell::new(1, 2), Cell::new(1, 2), Cell::new(1, 4)]);
        assert_eq!(map_real_trajectory(&w, &t).unwrap().len(), 3);
    }

    #[test]
    fn unreachable_pair_is_reported() {
        let w = grid(5, 10, |r, c| r == 1 || (r == 3 && c > 2));
        let t = geo_traj(&w, &[Cell::new(1, 0), Cell::new(1, 5), Cell::new(3, 5)]);
        match map_real_trajectory(&w, &t) {
            Err(Error::Unreachable { from: 1, to: 2 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn out_of_bounds_point() {
        let w = grid(3, 3, |_, _| true);
        let far = GeoFrame::cell_space(10.0).to_geo(Cell::new(50, 50));
        let t = RawTrajectory::new("x", vec![w.frame().to_geo(Cell::new(0, 0)), far]).unwrap();
        assert!(matches!(map_real_trajectory(&w, &t), Err(Error::OutOfBounds { .. })));
    }

    #[test]
    fn mapping_is_idempotent_and_visits_anchors() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let w = grid(40, 40, |r, c| r % 3 == 0 || c % 4 == 0);
        let corpus = synth_corpus(&w, 10, 5, &CorpusParams { mean_steps: 40.0, ..Default::default() }).unwrap();
        for p in &corpus {
            let again = map_real_trajectory(&w, &geo_traj(&w, &p.cells)).unwrap();
            let mut dedup = p.cells.clone();
            dedup.dedup();
            assert_eq!(again.cells, dedup);
        }
        let road: Vec<Cell> = w.road_cells().collect();
        for _ in 0..20 {
            let anchors: Vec<Cell> = (0..4).map(|_| road[rng.random_range(0..road.len())]).collect();
            let p = map_real_trajectory(&w, &geo_traj(&w, &anchors)).unwrap();
            p.validate(Some(&w)).unwrap();
            let mut k = 0;
            for c in &p.cells {
                if k < anchors.len() && *c == anchors[k] {
                    k += 1;
                }
            }
            assert_eq!(k, anchors.len());
        }
    }

    #[test]
    fn corpus_is_deterministic_and_valid() {
        let w = grid(60, 60, |r, c| r % 5 == 0 || c % 6 == 0);
        let params = CorpusParams::default();
        let a = synth_corpus(&w, 100, 9, &params).unwrap();
        let b = synth_corpus(&w, 100, 9, &params).unwrap();
        assert_eq!(a, b);
        for p in &a {
            p.validate(Some(&w)).unwrap();
        }
        let mean = a.iter().map(|p| (p.len() - 1) as f64).sum::<f64>() / a.len() as f64;
        assert!((mean - 200.0).abs() / 200.0 <= 0.2, "mean steps {mean}");
        assert_ne!(a, synth_corpus(&w, 100, 10, &params).unwrap());
        assert_eq!(synth_corpus(&w, 1, 3, &params).unwrap(), synth_corpus(&w, 1, 3, &params).unwrap());
    }
}
