//! Distance-bounded trajectory generation.
//!
//! A best-first search grows a tree of road paths from the start cell and
//! returns the first popped path whose accumulated distance reaches the
//! target. Node priority is a blended cost: attraction desirability while
//! the remaining distance is above `alpha`, shifting toward
//! distance-completion as it falls below. In feature mode the desirability
//! is additionally weighted by the landscape score of the partial path.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::features::IncrementalFeatures;
use crate::landscape::RewardLandscape;
use crate::world::{Cell, CellPath, GridWorld, MultiplierSet};

pub const DEFAULT_EPSILON: f64 = 1e-6;
pub const DEFAULT_ALPHA_PERCENT: f64 = 50.0;
pub const DEFAULT_BUDGET_FACTOR: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaPolicy {
    /// Remaining distance (cells) below which the blend shifts to distance.
    pub alpha: f64,
    pub epsilon: f64,
}

impl AlphaPolicy {
    pub fn cells(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!("alpha {alpha} must be positive")));
        }
        Ok(Self {
            alpha,
            epsilon: DEFAULT_EPSILON,
        })
    }

    /// `alpha = percent / 100 * target_distance`.
    pub fn percent(percent: f64, target_distance: f64) -> Result<Self> {
        Self::cells(percent / 100.0 * target_distance)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::invalid("epsilon must be positive"));
        }
        self.epsilon = epsilon;
        Ok(self)
    }
}

/// How alpha is configured: absolute cells or a share of the target distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaSpec {
    Cells(f64),
    Percent(f64),
}

impl AlphaSpec {
    pub fn resolve(self, target_distance: f64) -> Result<AlphaPolicy> {
        match self {
            AlphaSpec::Cells(a) => AlphaPolicy::cells(a),
            AlphaSpec::Percent(p) => AlphaPolicy::percent(p, target_distance),
        }
    }
}

impl Default for AlphaSpec {
    fn default() -> Self {
        AlphaSpec::Percent(DEFAULT_ALPHA_PERCENT)
    }
}

impl fmt::Display for AlphaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSpec::Cells(a) => write!(f, "{a}"),
            AlphaSpec::Percent(p) => write!(f, "{p}%"),
        }
    }
}

impl FromStr for AlphaSpec {
    type Err = Error;

    /// `"50%"` is a percentage, a bare number is cells.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (num, pct) = match s.strip_suffix('%') {
            Some(n) => (n.trim(), true),
            None => (s, false),
        };
        let v: f64 = num
            .parse()
            .map_err(|_| Error::invalid(format!("bad alpha {s:?}")))?;
        if !(v > 0.0) {
            return Err(Error::invalid(format!("alpha {s:?} must be positive")));
        }
        Ok(if pct { AlphaSpec::Percent(v) } else { AlphaSpec::Cells(v) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Attraction,
    Feature,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Attraction, Mode::Feature];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Attraction => "attraction",
            Mode::Feature => "feature",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "attraction" => Ok(Mode::Attraction),
            "feature" => Ok(Mode::Feature),
            other => Err(Error::invalid(format!("unknown mode {other:?}"))),
        }
    }
}

/// Blend coefficient: `max(0, alpha - d_end) / (alpha + epsilon)`.
pub fn delta(policy: &AlphaPolicy, d_end: f64) -> f64 {
    (policy.alpha - d_end).max(0.0) / (policy.alpha + policy.epsilon)
}

/// Cost-oriented heuristics shared by both generator modes. Attraction is
/// normalized by the world's maximum so `q_hat` lies in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct Heuristic<'a> {
    world: &'a GridWorld,
    weights: [f64; 6],
    q_max: f64,
    policy: AlphaPolicy,
    target_distance: f64,
    landscape: Option<&'a RewardLandscape>,
}

impl<'a> Heuristic<'a> {
    pub fn new(
        world: &'a GridWorld,
        multipliers: &MultiplierSet,
        policy: AlphaPolicy,
        target_distance: f64,
        landscape: Option<&'a RewardLandscape>,
    ) -> Self {
        Self {
            world,
            weights: *multipliers.values(),
            q_max: world.max_field_value(multipliers),
            policy,
            target_distance,
            landscape,
        }
    }

    #[inline]
    fn q_hat(&self, index: usize) -> f64 {
        if self.q_max > 0.0 {
            self.world.attraction_at(index, &self.weights) / self.q_max
        } else {
            0.0
        }
    }

    #[inline]
    fn blend(&self, desirability: f64, d_end: f64) -> f64 {
        let dl = delta(&self.policy, d_end);
        (1.0 - dl) * (1.0 - desirability) + dl * (d_end / self.target_distance)
    }

    /// `(1 - D) * (1 - q_hat) + D * d_end / target`.
    pub fn attraction_cost(&self, cell: Cell, d_end: f64) -> f64 {
        self.blend(self.q_hat(self.world.index(cell)), d_end)
    }

    /// Normalized landscape score of a partial path, clamped to `[0, 1]`.
    pub fn reward_weight(&self, partial: &IncrementalFeatures) -> Result<f64> {
        let landscape = self.landscape.ok_or(Error::MissingLandscape)?;
        let r = landscape.score_partial(partial) / (3.0 * landscape.max_trf);
        Ok(r.clamp(-1.0, 1.0).max(0.0))
    }

    /// `(1 - D) * (1 - q_hat * r_plus) + D * d_end / target`.
    pub fn feature_cost(&self, cell: Cell, partial: &IncrementalFeatures, d_end: f64) -> Result<f64> {
        let r = self.reward_weight(partial)?;
        Ok(self.blend(self.q_hat(self.world.index(cell)) * r, d_end))
    }
}

/// Attraction-mode heuristic at a road cell.
pub fn heuristic_attraction(
    world: &GridWorld,
    cell: Cell,
    multipliers: &MultiplierSet,
    policy: &AlphaPolicy,
    d_end: f64,
    target_distance: f64,
) -> Result<f64> {
    world.check_road(cell)?;
    Ok(Heuristic::new(world, multipliers, *policy, target_distance, None).attraction_cost(cell, d_end))
}

/// Feature-mode heuristic for a node whose partial path ends at `cell`.
#[allow(clippy::too_many_arguments)]
pub fn heuristic_feature(
    world: &GridWorld,
    cell: Cell,
    partial: &IncrementalFeatures,
    multipliers: &MultiplierSet,
    policy: &AlphaPolicy,
    d_end: f64,
    target_distance: f64,
    landscape: Option<&RewardLandscape>,
) -> Result<f64> {
    world.check_road(cell)?;
    let landscape = landscape.ok_or(Error::MissingLandscape)?;
    Heuristic::new(world, multipliers, *policy, target_distance, Some(landscape))
        .feature_cost(cell, partial, d_end)
}

#[derive(Debug, Clone)]
pub struct GenerationRequest<'a> {
    pub start: Cell,
    /// Distance to travel, in cell units.
    pub target_distance: f64,
    pub multipliers: MultiplierSet,
    pub alpha_policy: AlphaPolicy,
    pub mode: Mode,
    pub landscape: Option<&'a RewardLandscape>,
    pub seed: u64,
    /// Maximum number of node expansions.
    pub node_budget: usize,
    pub log_visits: bool,
}

impl<'a> GenerationRequest<'a> {
    /// Request with the default alpha (50 % of the target), uniform
    /// multipliers and a budget of 50 expansions per unit of target distance.
    pub fn new(start: Cell, target_distance: f64, mode: Mode, landscape: Option<&'a RewardLandscape>) -> Result<Self> {
        if !(target_distance > 0.0 && target_distance.is_finite()) {
            return Err(Error::invalid(format!("target distance {target_distance} must be positive")));
        }
        Ok(Self {
            start,
            target_distance,
            multipliers: MultiplierSet::uniform(),
            alpha_policy: AlphaSpec::default().resolve(target_distance)?,
            mode,
            landscape,
            seed: 0,
            node_budget: default_budget(target_distance, DEFAULT_BUDGET_FACTOR),
            log_visits: false,
        })
    }
}

pub fn default_budget(target_distance: f64, factor: f64) -> usize {
    (factor * target_distance).ceil().max(1.0) as usize
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visit {
    pub cell: Cell,
    pub f: f64,
    pub index: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SearchStats {
    /// Nodes inserted into the frontier, start included.
    pub opened: usize,
    /// Nodes expanded.
    pub closed: usize,
    /// Seconds spent in the search loop.
    pub wall_time: f64,
    pub visit_log: Vec<Visit>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationResult {
    pub path: CellPath,
    pub stats: SearchStats,
    pub achieved_distance: f64,
}

const NO_PARENT: u32 = u32::MAX;

struct Node {
    cell: Cell,
    g: f64,
    parent: u32,
    partial: Option<IncrementalFeatures>,
}

/// Frontier entry: lowest priority first, then a seeded pseudo-random key,
/// then insertion order.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Entry {
    pub priority: f64,
    pub tie: u64,
    pub seq: u64,
    pub node: u32,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .priority
            .total_cmp(&self.priority)
            .then_with(|| other.tie.cmp(&self.tie))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn path_to(nodes: &[Node], mut idx: u32) -> CellPath {
    let mut cells = Vec::new();
    while idx != NO_PARENT {
        let n = &nodes[idx as usize];
        cells.push(n.cell);
        idx = n.parent;
    }
    cells.reverse();
    CellPath::new(cells)
}

/// Runs the distance-bounded search.
///
/// Every road cell is expanded at most once; a cell may be inserted into
/// the frontier from several branches, and the first copy popped claims it.
/// Ties in priority are broken by a key derived from `seed` and the
/// insertion counter, so a given request always yields the same result.
pub fn generate(world: &GridWorld, req: &GenerationRequest<'_>) -> Result<GenerationResult> {
    world.check_road(req.start)?;
    if !(req.target_distance > 0.0 && req.target_distance.is_finite()) {
        return Err(Error::invalid("target distance must be positive"));
    }
    if req.mode == Mode::Feature && req.landscape.is_none() {
        return Err(Error::MissingLandscape);
    }
    if req.node_budget == 0 {
        return Err(Error::invalid("node budget must be positive"));
    }

    let timer = Instant::now();
    let heuristic = Heuristic::new(
        world,
        &req.multipliers,
        req.alpha_policy,
        req.target_distance,
        req.landscape,
    );
    let target = req.target_distance;
    let tie_seed = splitmix64(req.seed);

    let mut stats = SearchStats::default();
    let mut nodes: Vec<Node> = Vec::new();
    let mut heap: BinaryHeap<Entry> = BinaryHeap::new();
    let mut closed = vec![false; world.rows() * world.cols()];
    let mut seq: u64 = 0;

    let mut push = |nodes: &mut Vec<Node>, heap: &mut BinaryHeap<Entry>, node: Node, priority: f64| {
        let id = nodes.len() as u32;
        nodes.push(node);
        heap.push(Entry {
            priority,
            tie: splitmix64(tie_seed ^ seq),
            seq,
            node: id,
        });
        seq += 1;
    };

    let start_partial = (req.mode == Mode::Feature).then(|| IncrementalFeatures::new(req.start));
    let start_h = match &start_partial {
        Some(p) => heuristic.feature_cost(req.start, p, target)?,
        None => heuristic.attraction_cost(req.start, target),
    };
    push(
        &mut nodes,
        &mut heap,
        Node {
            cell: req.start,
            g: 0.0,
            parent: NO_PARENT,
            partial: start_partial,
        },
        start_h,
    );
    stats.opened = 1;

    let mut best: u32 = 0;
    let failure = |reason, nodes: &[Node], best: u32, closed: usize| Error::SearchFailed {
        reason,
        closed,
        best_distance: nodes[best as usize].g,
        best: path_to(nodes, best),
    };

    while let Some(entry) = heap.pop() {
        let (cell, g) = {
            let n = &nodes[entry.node as usize];
            (n.cell, n.g)
        };
        let ci = world.index(cell);
        if closed[ci] {
            continue;
        }
        closed[ci] = true;
        if req.log_visits {
            stats.visit_log.push(Visit {
                cell,
                f: entry.priority,
                index: stats.closed as u64,
            });
        }
        stats.closed += 1;
        if g > nodes[best as usize].g {
            best = entry.node;
        }

        if g >= target {
            stats.wall_time = timer.elapsed().as_secs_f64();
            let path = path_to(&nodes, entry.node);
            return Ok(GenerationResult {
                path,
                stats,
                achieved_distance: g,
            });
        }
        if stats.closed >= req.node_budget {
            return Err(failure("node budget exhausted", &nodes, best, stats.closed));
        }

        let parent_partial = nodes[entry.node as usize].partial;
        for next in world.road_neighbors(cell) {
            if closed[world.index(next)] {
                continue;
            }
            let child_g = g + cell.step_cost(next);
            let d_end = (target - child_g).max(0.0);
            let (partial, h) = match parent_partial {
                Some(p) => {
                    let child = p.extend(next);
                    let h = heuristic.feature_cost(next, &child, d_end)?;
                    (Some(child), h)
                }
                None => (None, heuristic.attraction_cost(next, d_end)),
            };
            push(
                &mut nodes,
                &mut heap,
                Node {
                    cell: next,
                    g: child_g,
                    parent: entry.node,
                    partial,
                },
                h,
            );
            stats.opened += 1;
        }
    }
    Err(failure("frontier exhausted", &nodes, best, stats.closed))
}

/// Seed for task `k` of a run seeded with `base`.
pub fn derive_seed(base: u64, k: u64) -> u64 {
    splitmix64(base ^ splitmix64(k))
}

/// Up to `n` distinct start cells drawn from the largest road component.
pub fn select_starts(world: &GridWorld, n: usize, seed: u64) -> Vec<Cell> {
    use rand::SeedableRng;
    let component = world.largest_component();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rand::seq::index::sample(&mut rng, component.len(), n.min(component.len()))
        .into_iter()
        .map(|i| component[i])
        .collect()
}

/// Runs independent requests on `workers` threads (`0` = all cores,
/// `1` = inline). Results keep request order and do not depend on the
/// worker count, apart from `wall_time`.
pub fn generate_batch(
    world: &GridWorld,
    requests: &[GenerationRequest<'_>],
    workers: usize,
) -> Vec<Result<GenerationResult>> {
    crate::par::map(requests, workers, |r| generate(world, r))
}

/// Plain A* between two road cells with the Euclidean heuristic and unit /
/// sqrt(2) step costs. Returns the path and its cost, or `None` when `to`
/// is unreachable.
pub fn shortest_path(world: &GridWorld, from: Cell, to: Cell) -> Result<Option<(CellPath, f64)>> {
    world.check_road(from)?;
    world.check_road(to)?;
    if from == to {
        return Ok(Some((CellPath::new(vec![from]), 0.0)));
    }
    let n = world.rows() * world.cols();
    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![u32::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let fi = world.index(from);
    g[fi] = 0.0;
    heap.push(Entry {
        priority: from.distance(to),
        tie: 0,
        seq,
        node: fi as u32,
    });
    while let Some(e) = heap.pop() {
        let i = e.node as usize;
        if closed[i] {
            continue;
        }
        closed[i] = true;
        let cell = world.cell_at(i);
        if cell == to {
            let mut cells = vec![cell];
            let mut k = i;
            while parent[k] != u32::MAX {
                k = parent[k] as usize;
                cells.push(world.cell_at(k));
            }
            cells.reverse();
            return Ok(Some((CellPath::new(cells), g[i])));
        }
        for next in world.road_neighbors(cell) {
            let j = world.index(next);
            if closed[j] {
                continue;
            }
            let cand = g[i] + cell.step_cost(next);
            if cand < g[j] {
                g[j] = cand;
                parent[j] = i as u32;
                seq += 1;
                heap.push(Entry {
                    priority: cand + next.distance(to),
                    // prefer deeper nodes among equal f
                    tie: (f64::MAX - cand).to_bits().wrapping_neg(),
                    seq,
                    node: j as u32,
                });
            }
        }
    }
    Ok(None)
}

pub const DUMP_HEADER: &str = "row,col,f,visit_index";

/// Writes the visit log as `row,col,f,visit_index` rows in visit order.
pub fn dump_search<W: Write>(stats: &SearchStats, mut out: W) -> Result<()> {
    writeln!(out, "{DUMP_HEADER}")?;
    for v in &stats.visit_log {
        writeln!(out, "{},{},{},{}", v.cell.row, v.cell.col, v.f, v.index)?;
    }
    out.flush()?;
    Ok(())
}

pub fn dump_search_file(stats: &SearchStats, path: &std::path::Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    dump_search(stats, std::io::BufWriter::new(file))
}

pub fn load_search<R: BufRead>(input: R) -> Result<Vec<Visit>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        if i == 0 {
            if line.trim() != DUMP_HEADER {
                return Err(Error::parse(line_no, format!("expected header {DUMP_HEADER:?}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::parse(line_no, "expected 4 fields"));
        }
        let bad = |what: &str| Error::parse(line_no, format!("bad {what}"));
        out.push(Visit {
            cell: Cell::new(
                fields[0].trim().parse().map_err(|_| bad("row"))?,
                fields[1].trim().parse().map_err(|_| bad("col"))?,
            ),
            f: fields[2].trim().parse().map_err(|_| bad("f"))?,
            index: fields[3].trim().parse().map_err(|_| bad("visit_index"))?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{extract_features, FeatureVector};
    use crate::landscape::{fit_landscape, LandscapeParams};
    use crate::world::{Poi, Tag};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn corridor(len: usize) -> GridWorld {
        let mut mask = vec![false; 3 * len];
        mask[len..2 * len].fill(true);
        GridWorld::from_mask(3, len, 10.0, mask, vec![]).unwrap()
    }

    fn lattice_world(seed: u64, n: usize, pois: usize) -> GridWorld {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mask = vec![false; n * n];
        for r in 0..n {
            for c in 0..n {
                mask[r * n + c] = r % 4 == 0 || c % 5 == 0 || rng.random_bool(0.08);
            }
        }
        let pois = (0..pois)
            .map(|_| Poi {
                position: Cell::new(rng.random_range(0..n), rng.random_range(0..n)),
                tag: Tag::ALL[rng.random_range(0..6)],
                charge: rng.random_range(1.0..5.0),
            })
            .collect();
        GridWorld::from_mask(n, n, 10.0, mask, pois).unwrap()
    }

    fn small_landscape() -> RewardLandscape {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let corpus: Vec<FeatureVector> = (0..200)
            .map(|_| {
                let len = rng.random_range(10..120);
                let far = rng.random_range(3.0..(len as f64 * 0.7).max(4.0));
                FeatureVector {
                    total_length: len,
                    curliness: rng.random_range(0.0..1.0),
                    farthest_distance: far,
                    end_distance: far,
                    middle_distance: far,
                }
            })
            .collect();
        fit_landscape(&corpus, &LandscapeParams::default()).unwrap()
    }

    #[test]
    fn delta_examples() {
        let p = AlphaPolicy::cells(50.0).unwrap();
        assert_eq!(delta(&p, 100.0), 0.0);
        assert_eq!(delta(&p, 50.0), 0.0);
        assert_eq!(delta(&p, 0.0), 50.0 / (50.0 + 1e-6));
        assert!((delta(&p, 0.0) - 1.0).abs() < 1e-7);
        assert_eq!(delta(&p, 25.0), 25.0 / 50.000001);
        assert!((delta(&p, 25.0) - 0.49999999).abs() < 1e-12);
    }

    #[test]
    fn alpha_spec_parsing() {
        assert_eq!("50%".parse::<AlphaSpec>().unwrap(), AlphaSpec::Percent(50.0));
        assert_eq!("12.5".parse::<AlphaSpec>().unwrap(), AlphaSpec::Cells(12.5));
        assert!("0".parse::<AlphaSpec>().is_err());
        assert_eq!(AlphaSpec::Percent(25.0).resolve(400.0).unwrap().alpha, 100.0);
    }

    #[test]
    fn attraction_heuristic_cases() {
        let w = lattice_world(3, 30, 10);
        let m = MultiplierSet::uniform();
        let p = AlphaPolicy::cells(20.0).unwrap();
        let road: Vec<Cell> = w.road_cells().collect();
        let h = Heuristic::new(&w, &m, p, 100.0, None);
        // d_end >= alpha: only the attraction term matters
        for &c in road.iter().take(50) {
            let a = h.attraction_cost(c, 20.0);
            let b = h.attraction_cost(c, 90.0);
            assert_eq!(a, b);
            let q = w.attraction(c, &m).unwrap() / w.max_field_value(&m);
            assert_eq!(a, 1.0 - q);
        }
        // d_end = 0: Delta ~ 1, distance term 0
        for &c in road.iter().take(50) {
            assert!(h.attraction_cost(c, 0.0).abs() < 1e-7);
        }
        // global maximum on a road cell, Delta = 0
        let peak = Poi { position: Cell::new(1, 1), tag: Tag::Shop, charge: 3.0 };
        let mut mask = vec![true; 9];
        mask[0] = false;
        let w2 = GridWorld::from_mask(3, 3, 1.0, mask, vec![peak]).unwrap();
        assert_eq!(heuristic_attraction(&w2, Cell::new(1, 1), &m, &p, 50.0, 100.0).unwrap(), 0.0);
        assert!(heuristic_attraction(&w2, Cell::new(0, 0), &m, &p, 50.0, 100.0).is_err());
    }

    #[test]
    fn zero_field_world_has_zero_desirability() {
        let w = corridor(8);
        let p = AlphaPolicy::cells(1.0).unwrap();
        let h = heuristic_attraction(&w, Cell::new(1, 3), &MultiplierSet::uniform(), &p, 5.0, 10.0).unwrap();
        assert_eq!(h, 1.0);
    }

    #[test]
    fn feature_heuristic_recomposes() {
        let w = lattice_world(4, 40, 15);
        let l = small_landscape();
        let m = MultiplierSet::new([1.0, 25.0, 10.0, 75.0, 50.0, 100.0]).unwrap();
        let p = AlphaPolicy::cells(30.0).unwrap();
        let start = w.road_cells().next().unwrap();
        let mut partial = IncrementalFeatures::new(start);
        let mut cell = start;
        let mut path = vec![start];
        for _ in 0..40 {
            let Some(next) = w.road_neighbors(cell).find(|n| !path.contains(n)) else { break };
            partial = partial.extend(next);
            path.push(next);
            cell = next;
        }
        let g = CellPath::new(path.clone()).distance();
        let d_end = (100.0 - g).max(0.0);
        let got = heuristic_feature(&w, cell, &partial, &m, &p, d_end, 100.0, Some(&l)).unwrap();

        let f = extract_features(&CellPath::new(path)).unwrap();
        let r = (l.combined_score(&f) / (3.0 * l.max_trf)).clamp(-1.0, 1.0).max(0.0);
        let q = w.attraction(cell, &m).unwrap() / w.max_field_value(&m);
        let dl = delta(&p, d_end);
        let expect = (1.0 - dl) * (1.0 - q * r) + dl * d_end / 100.0;
        assert!((got - expect).abs() <= 1e-12);

        assert!(matches!(
            heuristic_feature(&w, cell, &partial, &m, &p, d_end, 100.0, None),
            Err(Error::MissingLandscape)
        ));
    }

    #[test]
    fn feature_heuristic_clamps_negative_reward() {
        let w = lattice_world(5, 30, 10);
        let l = small_landscape();
        let p = AlphaPolicy::cells(1.0).unwrap();
        let start = w.road_cells().next().unwrap();
        // a 1-cell path lies far outside the corpus landscape
        let partial = IncrementalFeatures::new(start);
        assert!(l.score_partial(&partial) < 0.0);
        let h = heuristic_feature(&w, start, &partial, &MultiplierSet::uniform(), &p, 50.0, 100.0, Some(&l)).unwrap();
        assert_eq!(h, 1.0);
    }

    #[test]
    fn corridor_generation_is_exact() {
        let w = corridor(30);
        let req = GenerationRequest::new(Cell::new(1, 0), 10.0, Mode::Attraction, None).unwrap();
        let res = generate(&w, &req).unwrap();
        assert_eq!(res.path.len(), 11);
        assert_eq!(res.achieved_distance, 10.0);
        assert_eq!(res.path.cells, (0..=10).map(|c| Cell::new(1, c)).collect::<Vec<_>>());
        assert!(res.stats.closed <= res.stats.opened);
    }

    #[test]
    fn start_must_be_road() {
        let w = corridor(10);
        let req = GenerationRequest::new(Cell::new(0, 0), 5.0, Mode::Attraction, None).unwrap();
        assert!(matches!(generate(&w, &req), Err(Error::NotRoad { .. })));
        let req = GenerationRequest::new(Cell::new(1, 0), 5.0, Mode::Feature, None).unwrap();
        assert!(matches!(generate(&w, &req), Err(Error::MissingLandscape)));
    }

    #[test]
    fn budget_exhaustion_carries_partial_path() {
        let w = corridor(10);
        let mut req = GenerationRequest::new(Cell::new(1, 0), 100.0, Mode::Attraction, None).unwrap();
        req.node_budget = 4;
        match generate(&w, &req) {
            Err(Error::SearchFailed { closed, best, best_distance, .. }) => {
                assert_eq!(closed, 4);
                assert_eq!(best.len(), 4);
                assert_eq!(best_distance, 3.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        // a dead end runs out of frontier before the budget
        req.node_budget = 1000;
        assert!(matches!(
            generate(&w, &req),
            Err(Error::SearchFailed { reason: "frontier exhausted", .. })
        ));
    }

    #[test]
    fn full_alpha_reaches_target_within_one_step() {
        let w = lattice_world(8, 60, 20);
        let start = w.largest_component()[0];
        for seed in 0..10 {
            let mut req = GenerationRequest::new(start, 80.0, Mode::Attraction, None).unwrap();
            req.alpha_policy = AlphaPolicy::percent(100.0, 80.0).unwrap();
            req.seed = seed;
            let res = generate(&w, &req).unwrap();
            assert!(res.achieved_distance >= 80.0);
            assert!(res.achieved_distance < 80.0 + std::f64::consts::SQRT_2);
            assert_eq!(res.achieved_distance, res.path.distance());
            res.path.validate(Some(&w)).unwrap();
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let w = lattice_world(9, 60, 20);
        let l = small_landscape();
        let start = w.largest_component()[17];
        for mode in Mode::ALL {
            let mut req = GenerationRequest::new(start, 60.0, mode, Some(&l)).unwrap();
            req.seed = 42;
            req.log_visits = true;
            let a = generate(&w, &req).unwrap();
            let b = generate(&w, &req).unwrap();
            assert_eq!(a.path, b.path);
            assert_eq!((a.stats.opened, a.stats.closed), (b.stats.opened, b.stats.closed));
            assert_eq!(a.stats.visit_log, b.stats.visit_log);
            assert_eq!(a.stats.visit_log.len(), a.stats.closed);
            assert!(a.stats.visit_log.windows(2).all(|v| v[0].index < v[1].index));
        }
    }

    #[test]
    fn starts_are_distinct_and_seeded() {
        let w = lattice_world(13, 40, 5);
        let a = select_starts(&w, 10, 4);
        assert_eq!(a, select_starts(&w, 10, 4));
        assert_ne!(a, select_starts(&w, 10, 5));
        let mut d = a.clone();
        d.sort_by_key(|c| (c.row, c.col));
        d.dedup();
        assert_eq!(d.len(), 10);
        assert!(a.iter().all(|&c| w.is_road(c)));
        assert_eq!(select_starts(&w, 1 << 20, 0).len(), w.largest_component().len());
    }

    #[test]
    fn batch_matches_single_runs() {
        let w = lattice_world(12, 50, 20);
        let comp = w.largest_component();
        let reqs: Vec<GenerationRequest> = (0..6)
            .map(|i| {
                let mut r = GenerationRequest::new(comp[i * 7], 40.0, Mode::Attraction, None).unwrap();
                r.seed = i as u64;
                r
            })
            .collect();
        let one = generate_batch(&w, &reqs, 1);
        let many = generate_batch(&w, &reqs, 3);
        for ((a, b), r) in one.iter().zip(&many).zip(&reqs) {
            let (a, b) = (a.as_ref().unwrap(), b.as_ref().unwrap());
            assert_eq!(a.path, b.path);
            assert_eq!(a.path, generate(&w, r).unwrap().path);
        }
    }

    #[test]
    fn common_multiplier_scale_keeps_path() {
        let w = lattice_world(10, 50, 25);
        let start = w.largest_component()[5];
        let base = [1.0, 25.0, 10.0, 50.0, 5.0, 40.0];
        for seed in 0..5 {
            let mut req = GenerationRequest::new(start, 50.0, Mode::Attraction, None).unwrap();
            req.seed = seed;
            req.multipliers = MultiplierSet::new(base).unwrap();
            let a = generate(&w, &req).unwrap();
            req.multipliers = MultiplierSet::new(base.map(|v| v * 2.0)).unwrap();
            let b = generate(&w, &req).unwrap();
            assert_eq!(a.path, b.path);
        }
    }

    #[test]
    fn feature_partial_matches_final_path() {
        let w = lattice_world(11, 60, 20);
        let l = small_landscape();
        let start = w.largest_component()[3];
        let req = GenerationRequest::new(start, 70.0, Mode::Feature, Some(&l)).unwrap();
        let res = generate(&w, &req).unwrap();
        let mut inc = IncrementalFeatures::new(res.path.cells[0]);
        for &c in &res.path.cells[1..] {
            inc = inc.extend(c);
        }
        let f = extract_features(&res.path).unwrap();
        assert_eq!(inc.total_length(), f.total_length);
        assert!((inc.curliness() - f.curliness).abs() <= 1e-9);
        assert!((inc.farthest_distance() - f.farthest_distance).abs() <= 1e-9);
    }

    /// Dijkstra over the same grid, used as an independent cost oracle.
    fn dijkstra(w: &GridWorld, from: Cell, to: Cell) -> Option<f64> {
        let n = w.rows() * w.cols();
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        dist[w.index(from)] = 0.0;
        loop {
            let mut best = None;
            for i in 0..n {
                if !done[i] && dist[i].is_finite() && best.is_none_or(|b: usize| dist[i] < dist[b]) {
                    best = Some(i);
                }
            }
            let i = best?;
            if i == w.index(to) {
                return Some(dist[i]);
            }
            done[i] = true;
            let c = w.cell_at(i);
            for nb in w.road_neighbors(c) {
                let j = w.index(nb);
                dist[j] = dist[j].min(dist[i] + c.step_cost(nb));
            }
        }
    }

    #[test]
    fn shortest_path_matches_dijkstra() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..30 {
            let mask: Vec<bool> = (0..400).map(|_| rng.random_bool(0.6)).collect();
            if !mask.iter().any(|&b| b) {
                continue;
            }
            let w = GridWorld::from_mask(20, 20, 1.0, mask, vec![]).unwrap();
            let road: Vec<Cell> = w.road_cells().collect();
            let a = road[rng.random_range(0..road.len())];
            let b = road[rng.random_range(0..road.len())];
            let got = shortest_path(&w, a, b).unwrap();
            let expect = dijkstra(&w, a, b);
            match (got, expect) {
                (Some((p, cost)), Some(d)) => {
                    assert!((cost - d).abs() < 1e-9);
                    assert!((p.distance() - d).abs() < 1e-9);
                    p.validate(Some(&w)).unwrap();
                }
                (None, None) => {}
                (g, e) => panic!("mismatch {g:?} vs {e:?}"),
            }
        }
    }

    #[test]
    fn dump_examples() {
        let mut buf = Vec::new();
        dump_search(&SearchStats::default(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "row,col,f,visit_index\n");
        assert!(load_search(&buf[..]).unwrap().is_empty());

        let stats = SearchStats {
            visit_log: (0..3)
                .map(|i| Visit { cell: Cell::new(i, 2 * i), f: 0.1 * i as f64, index: i as u64 })
                .collect(),
            ..Default::default()
        };
        let mut buf = Vec::new();
        dump_search(&stats, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert_eq!(text.lines().nth(3).unwrap(), "2,4,0.2,2");
        assert!(load_search("row,col\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn dump_round_trips(raw in prop::collection::vec((0usize..5000, 0usize..5000, proptest::num::f64::NORMAL | proptest::num::f64::ZERO), 0..50)) {
            let stats = SearchStats {
                visit_log: raw.iter().enumerate().map(|(i, &(r, c, f))| Visit { cell: Cell::new(r, c), f, index: i as u64 }).collect(),
                ..Default::default()
            };
            let mut buf = Vec::new();
            dump_search(&stats, &mut buf).unwrap();
            prop_assert_eq!(load_search(&buf[..]).unwrap(), stats.visit_log);
        }

        #[test]
        fn delta_is_monotone(alpha in 0.1f64..1000.0, a in 0.0f64..2000.0, b in 0.0f64..2000.0) {
            let p = AlphaPolicy::cells(alpha).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(delta(&p, lo) >= delta(&p, hi));
            prop_assert!(delta(&p, lo) <= alpha / (alpha + p.epsilon));
            prop_assert!(delta(&p, hi) >= 0.0);
        }
    }
}
