//! Similarity, significance and sweep aggregation.

use std::collections::BTreeMap;
use std::io::Write;

use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::features::{group_metrics, FeatureVector};
use crate::geom::Point2;
use crate::par;
use crate::planner::{Mode, SearchStats};
use crate::world::{CellPath, MultiplierSet};

/// Classic DTW with Euclidean local cost and no warping window.
pub fn dtw(a: &[Point2], b: &[Point2]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("dtw needs nonempty sequences"));
    }
    let m = b.len();
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut cur = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for pa in a {
        cur[0] = f64::INFINITY;
        for (j, pb) in b.iter().enumerate() {
            let best = prev[j].min(prev[j + 1]).min(cur[j]);
            cur[j + 1] = pa.distance(*pb) + best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m])
}

/// Cell path as `(col, row)` points.
pub fn path_points(path: &CellPath) -> Vec<Point2> {
    path.cells
        .iter()
        .map(|c| Point2::new(c.col as f64, c.row as f64))
        .collect()
}

pub fn dtw_paths(a: &CellPath, b: &CellPath) -> Result<f64> {
    dtw(&path_points(a), &path_points(b))
}

/// Sorted pairwise DTW distances, each paired with its cumulative share
/// of pairs in percent.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DtwCurve {
    pub points: Vec<(f64, f64)>,
}

impl DtwCurve {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn distances(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "percentage,distance")?;
        for (p, d) in &self.points {
            writeln!(out, "{p},{d}")?;
        }
        Ok(())
    }
}

/// All unordered pairs of `group`, compared on `workers` threads.
pub fn dtw_curve(group: &[CellPath], workers: usize) -> Result<DtwCurve> {
    if group.len() < 2 {
        return Err(Error::invalid("dtw curve needs at least 2 paths"));
    }
    let points: Vec<Vec<Point2>> = group.iter().map(path_points).collect();
    let pairs: Vec<(usize, usize)> = (0..group.len())
        .flat_map(|i| (i + 1..group.len()).map(move |j| (i, j)))
        .collect();
    let mut d = par::map(&pairs, workers, |&(i, j)| dtw(&points[i], &points[j]))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    d.sort_by(f64::total_cmp);
    let n = d.len() as f64;
    Ok(DtwCurve {
        points: d
            .into_iter()
            .enumerate()
            .map(|(k, v)| ((k + 1) as f64 / n * 100.0, v))
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilcoxonResult {
    /// Rank sum of positive differences `x - y`.
    pub w_plus: f64,
    pub w_minus: f64,
    /// `min(w_plus, w_minus)`.
    pub statistic: f64,
    pub p_value: f64,
    /// Pairs left after dropping zero differences.
    pub n: usize,
    pub exact: bool,
}

pub const WILCOXON_EXACT_MAX: usize = 25;

/// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
/// are dropped and tied magnitudes share their average rank. Up to 25 pairs
/// the null distribution is enumerated exactly (including tied ranks);
/// above that a tie-corrected normal approximation with continuity
/// correction is used.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<WilcoxonResult> {
    if x.len() != y.len() {
        return Err(Error::invalid("wilcoxon samples must have equal length"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("wilcoxon samples must be finite"));
    }
    let diffs: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|d| *d != 0.0).collect();
    if diffs.is_empty() {
        return Err(Error::DegenerateSample);
    }
    let n = diffs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diffs[i].abs().total_cmp(&diffs[j].abs()));
    // doubled average ranks stay integral
    let mut rank2 = vec![0u64; n];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && diffs[order[j + 1]].abs() == diffs[order[i]].abs() {
            j += 1;
        }
        let r2 = (i + 1 + j + 1) as u64;
        for &k in &order[i..=j] {
            rank2[k] = r2;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let w2_plus: u64 = (0..n).filter(|&k| diffs[k] > 0.0).map(|k| rank2[k]).sum();
    let total2: u64 = rank2.iter().sum();
    let w_plus = w2_plus as f64 / 2.0;
    let w_minus = (total2 - w2_plus) as f64 / 2.0;

    let (p, exact) = if n <= WILCOXON_EXACT_MAX {
        (exact_p(&rank2, w2_plus), true)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
        let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
        (erfc(z / std::f64::consts::SQRT_2), false)
    };
    Ok(WilcoxonResult {
        w_plus,
        w_minus,
        statistic: w_plus.min(w_minus),
        p_value: p.clamp(f64::MIN_POSITIVE, 1.0),
        n,
        exact,
    })
}

/// Two-sided exact p-value: counts sign assignments whose doubled positive
/// rank sum is at least as extreme as `observed`, via a subset-sum DP.
fn exact_p(rank2: &[u64], observed: u64) -> f64 {
    let total: u64 = rank2.iter().sum();
    let mut counts = vec![0f64; total as usize + 1];
    counts[0] = 1.0;
    let mut reach = 0usize;
    for &r in rank2 {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let all = 2f64.powi(rank2.len() as i32);
    let obs = observed as usize;
    let lower: f64 = counts[..=obs].iter().sum();
    let upper: f64 = counts[obs..].iter().sum();
    (2.0 * lower.min(upper) / all).min(1.0)
}

pub const BASE_MULTIPLIERS: [f64; 6] = [1.0, 25.0, 10.0, 75.0, 50.0, 100.0];

/// All 720 orderings of the base vector, in lexicographic order of the
/// permutation indices (identity first).
pub fn enumerate_multipliers() -> Vec<MultiplierSet> {
    let mut out = Vec::with_capacity(720);
    let mut idx = [0usize, 1, 2, 3, 4, 5];
    loop {
        out.push(MultiplierSet::new(idx.map(|i| BASE_MULTIPLIERS[i])).expect("base values are in range"));
        if !next_permutation(&mut idx) {
            return out;
        }
    }
}

fn next_permutation(a: &mut [usize]) -> bool {
    let Some(i) = (1..a.len()).rev().find(|&i| a[i - 1] < a[i]) else {
        return false;
    };
    let j = (i..a.len()).rev().find(|&j| a[j] > a[i - 1]).expect("pivot has a successor");
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// `k` distinct indices from `0..n` drawn with a seeded generator, in
/// ascending order. Returns all of `0..n` when `k >= n`.
pub fn sample_indices(n: usize, k: usize, seed: u64) -> Vec<usize> {
    use rand::SeedableRng;
    if k >= n {
        return (0..n).collect();
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = rand::seq::index::sample(&mut rng, n, k).into_vec();
    out.sort_unstable();
    out
}

/// Alpha percentages `{1, 5, 10, ..., 100}`: 21 values.
pub fn enumerate_alphas() -> Vec<f64> {
    std::iter::once(1.0).chain((1..=20).map(|k| 5.0 * k as f64)).collect()
}

/// One generated path in a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub start_id: usize,
    /// Alpha percentage or multiplier permutation index.
    pub variant_id: f64,
    pub mode: Mode,
    pub features: FeatureVector,
    pub stats: SearchStats,
    pub path: CellPath,
}

pub const SUMMARY_METRICS: [&str; 10] = [
    "wall_time",
    "opened",
    "closed",
    "total_length",
    "curliness",
    "farthest_distance",
    "end_distance",
    "middle_distance",
    "no_overlapping",
    "directions",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub mode: Mode,
    pub variant_id: f64,
    pub records: usize,
    /// `(mean, population std)` for each entry of [`SUMMARY_METRICS`].
    pub metrics: [(f64, f64); 10],
}

/// Neumaier-compensated sum of the values in ascending order, so the
/// result does not depend on input order.
fn stable_sum(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for &v in values.iter() {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mut v = values.to_vec();
    let n = v.len() as f64;
    let mean = stable_sum(&mut v) / n;
    let mut sq: Vec<f64> = values.iter().map(|x| (x - mean) * (x - mean)).collect();
    (mean, (stable_sum(&mut sq) / n).sqrt())
}

/// Per `(mode, variant)` means and population standard deviations. Path
/// metrics average over records; group metrics are computed per start and
/// average over starts.
pub fn aggregate_sweep(records: &[SweepRecord]) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(Error::invalid("nothing to aggregate"));
    }
    let mut groups: BTreeMap<(Mode, u64), Vec<&SweepRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.mode, ordered_bits(r.variant_id)))
            .or_default()
            .push(r);
    }
    let mut rows = Vec::with_capacity(groups.len());
    for ((mode, _), recs) in groups {
        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); SUMMARY_METRICS.len()];
        for r in &recs {
            let f = &r.features;
            let vals = [
                r.stats.wall_time,
                r.stats.opened as f64,
                r.stats.closed as f64,
                f.total_length as f64,
                f.curliness,
                f.farthest_distance,
                f.end_distance,
                f.middle_distance,
            ];
            for (c, v) in cols.iter_mut().zip(vals) {
                c.push(v);
            }
        }
        let mut by_start: BTreeMap<usize, Vec<CellPath>> = BTreeMap::new();
        for r in &recs {
            by_start.entry(r.start_id).or_default().push(r.path.clone());
        }
        for paths in by_start.values() {
            let g = group_metrics(paths)?;
            cols[8].push(g.no_overlapping as f64);
            cols[9].push(g.directions as f64);
        }
        let mut metrics = [(0.0, 0.0); 10];
        for (m, c) in metrics.iter_mut().zip(&cols) {
            *m = mean_std(c);
        }
        rows.push(SummaryRow {
            mode,
            variant_id: recs[0].variant_id,
            records: recs.len(),
            metrics,
        });
    }
    Ok(rows)
}

/// Order-preserving key for finite floats.
fn ordered_bits(v: f64) -> u64 {
    let b = v.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

pub fn summary_header() -> String {
    let mut h = String::from("mode,variant,records");
    for m in SUMMARY_METRICS {
        h.push_str(&format!(",{m}_mean,{m}_std"));
    }
    h
}

pub fn write_summary<W: Write>(rows: &[SummaryRow], mut out: W) -> Result<()> {
    writeln!(out, "{}", summary_header())?;
    for r in rows {
        write!(out, "{},{},{}", r.mode, r.variant_id, r.records)?;
        for (m, s) in &r.metrics {
            write!(out, ",{m},{s}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}
