//! Command implementations. Every command reads and writes files under an
//! output directory; all tables are written in a fixed key order so the
//! bytes do not depend on the worker count.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use log::{info, warn};
use trailforge::eval::{
    aggregate_sweep, dtw_curve, enumerate_alphas, enumerate_multipliers, sample_indices,
    wilcoxon_signed_rank, write_summary, SweepRecord,
};
use trailforge::fixtures::{Fixture, FixtureParams};
use trailforge::geo::build_world;
use trailforge::ingest::{
    load_pois, load_roads, load_trajectories, map_real_trajectory, synth_corpus, write_pois,
    write_roads, write_trajectories, CorpusParams, RawTrajectory,
};
use trailforge::landscape::PlaneKind;
use trailforge::persist::{load_world, save_world};
use trailforge::planner::{
    default_budget, derive_seed, dump_search_file, generate_batch, load_search, select_starts,
    AlphaSpec,
};
use trailforge::postprocess::{fit_spacing, subsample, SpacingModel};
use trailforge::{
    extract_features, fit_landscape, Cell, CellPath, Error, FeatureVector, GenerationRequest,
    GenerationResult, GridWorld, LandscapeParams, Mode, MultiplierSet, RewardLandscape,
    SearchStats,
};

use crate::config::RunConfig;
use crate::svg;
use crate::table::{opt, Rows, Table};

pub const WORLD_FILE: &str = "world.bin";
pub const LANDSCAPE_FILE: &str = "landscape.txt";
pub const SPACING_FILE: &str = "spacing.txt";
pub const CORPUS_FEATURES_FILE: &str = "corpus_features.csv";
pub const STATS_FILE: &str = "stats.csv";
pub const PATHS_FILE: &str = "paths.txt";
pub const TRAJECTORIES_FILE: &str = "trajectories.txt";

// Independent seed streams derived from the run seed.
const STREAM_STARTS: u64 = 0;
const STREAM_GENERATE: u64 = 1;
const STREAM_SWEEP: u64 = 2;
const STREAM_PERMUTATIONS: u64 = 3;

/// Settings shared by all commands.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub out: PathBuf,
    /// `0` = all cores.
    pub workers: usize,
    pub max_starts: Option<usize>,
    pub max_permutations: Option<usize>,
}

impl RunContext {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Self {
            out: out.into(),
            workers: 0,
            max_starts: None,
            max_permutations: None,
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn starts(&self, cfg: &RunConfig) -> usize {
        self.max_starts.map_or(cfg.starts, |m| m.min(cfg.starts))
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn feature_fields(f: &FeatureVector) -> Vec<String> {
    vec![
        f.total_length.to_string(),
        f.curliness.to_string(),
        f.farthest_distance.to_string(),
        f.end_distance.to_string(),
        f.middle_distance.to_string(),
    ]
}

fn format_path(id: &str, path: &CellPath) -> String {
    let cells: Vec<String> = path.cells.iter().map(|c| format!("{},{}", c.row, c.col)).collect();
    format!("{id}|{}", cells.join(";"))
}

/// Reads `id|r,c;r,c;...` lines.
pub fn parse_paths(text: &str) -> Result<Vec<(String, CellPath)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = || anyhow!("line {}: expected id|row,col;row,col;...", i + 1);
        let (id, body) = line.split_once('|').ok_or_else(bad)?;
        let cells = body
            .split(';')
            .map(|c| {
                let (r, c) = c.split_once(',').ok_or_else(bad)?;
                Ok(Cell::new(r.trim().parse().map_err(|_| bad())?, c.trim().parse().map_err(|_| bad())?))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push((id.to_string(), CellPath::new(cells)));
    }
    Ok(out)
}

pub fn load_paths(path: &Path) -> Result<Vec<(String, CellPath)>> {
    parse_paths(&read(path)?).with_context(|| format!("paths file {}", path.display()))
}

/// Artifacts written by `build` and read by the later stages.
pub struct Artifacts {
    pub world: GridWorld,
    pub landscape: RewardLandscape,
    pub spacing: SpacingModel,
}

impl Artifacts {
    pub fn load(ctx: &RunContext) -> Result<Self> {
        let world_path = ctx.path(WORLD_FILE);
        if !world_path.is_file() {
            bail!("{} not found; run `build` first", world_path.display());
        }
        let world = load_world(&world_path).with_context(|| format!("loading {}", world_path.display()))?;
        let landscape = RewardLandscape::from_text(&read(&ctx.path(LANDSCAPE_FILE))?)
            .with_context(|| format!("parsing {}", ctx.path(LANDSCAPE_FILE).display()))?;
        let spacing: SpacingModel = read(&ctx.path(SPACING_FILE))?
            .parse()
            .with_context(|| format!("parsing {}", ctx.path(SPACING_FILE).display()))?;
        Ok(Self { world, landscape, spacing })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildSummary {
    pub road_cells: usize,
    pub pois: usize,
    pub corpus: usize,
}

/// Builds the world, the corpus landscape and the spacing model.
pub fn build(cfg: &RunConfig, ctx: &RunContext) -> Result<BuildSummary> {
    cfg.check_inputs()?;
    let roads = load_roads(&cfg.road_file).with_context(|| format!("road file {}", cfg.road_file.display()))?;
    let pois = load_pois(&cfg.poi_file).with_context(|| format!("POI file {}", cfg.poi_file.display()))?;
    if pois.rejected > 0 {
        warn!("skipped {} POIs without a known tag", pois.rejected);
    }
    let (world, report) = build_world(&roads, &pois.pois, cfg.cell_size_m).context("building world")?;
    if report.dropped_pois > 0 {
        warn!("dropped {} POIs outside the road extent", report.dropped_pois);
    }

    let (corpus, spacing) = match &cfg.corpus_file {
        Some(file) => {
            let raw = load_trajectories(file).with_context(|| format!("corpus file {}", file.display()))?;
            let mut paths = Vec::with_capacity(raw.len());
            for t in &raw {
                match map_real_trajectory(&world, t) {
                    Ok(p) => paths.push(p),
                    Err(e) => warn!("skipping trajectory {}: {e}", t.id),
                }
            }
            if paths.is_empty() {
                bail!("no corpus trajectory could be mapped onto the road grid");
            }
            (paths, fit_raw_spacing(&world, &raw)?)
        }
        None => {
            let params = CorpusParams {
                mean_steps: cfg.corpus_mean_steps,
                ..CorpusParams::default()
            };
            let paths = synth_corpus(&world, cfg.corpus_count, cfg.corpus_seed, &params)
                .context("synthesizing corpus")?;
            let spacing = SpacingModel::from_moments(cfg.spacing_mean_m, cfg.spacing_std_m)
                .context("spacing moments")?;
            (paths, spacing)
        }
    };

    let features = corpus
        .iter()
        .map(extract_features)
        .collect::<trailforge::Result<Vec<_>>>()
        .context("corpus features")?;
    let params = LandscapeParams {
        max_trf: cfg.max_trf,
        z_threshold: cfg.z_threshold,
        middle: cfg.trf_middle,
    };
    let landscape = fit_landscape(&features, &params).context("fitting landscape")?;

    std::fs::create_dir_all(&ctx.out).with_context(|| format!("creating {}", ctx.out.display()))?;
    save_world(&world, &ctx.path(WORLD_FILE)).context("writing world")?;
    write(&ctx.path(LANDSCAPE_FILE), &landscape.to_text())?;
    write(&ctx.path(SPACING_FILE), &spacing.to_string())?;
    let mut t = Table::new(&FeatureVector::NAMES);
    for f in &features {
        t.row(feature_fields(f));
    }
    t.save(&ctx.path(CORPUS_FEATURES_FILE))?;
    let summary = BuildSummary {
        road_cells: world.road_count(),
        pois: world.pois().len(),
        corpus: features.len(),
    };
    info!("built {}x{} world: {summary:?}", world.rows(), world.cols());
    Ok(summary)
}

/// Lognormal fit of the metric gaps between consecutive raw points.
fn fit_raw_spacing(world: &GridWorld, raw: &[RawTrajectory]) -> Result<SpacingModel> {
    let frame = world.frame();
    let gaps: Vec<f64> = raw
        .iter()
        .flat_map(|t| {
            t.points.windows(2).map(|w| {
                let (a, b) = (frame.project(&w[0]), frame.project(&w[1]));
                (a.0 - b.0).hypot(a.1 - b.1)
            })
        })
        .filter(|g| *g > 0.0)
        .collect();
    fit_spacing(&gaps).context("fitting point spacing")
}

pub fn load_corpus_features(path: &Path) -> Result<Vec<FeatureVector>> {
    let t = Rows::load(path)?;
    t.rows
        .iter()
        .map(|r| {
            Ok(FeatureVector {
                total_length: t.num(r, "total_length")?,
                curliness: t.num(r, "curliness")?,
                farthest_distance: t.num(r, "farthest_distance")?,
                end_distance: t.num(r, "end_distance")?,
                middle_distance: t.num(r, "middle_distance")?,
            })
        })
        .collect()
}

struct Task {
    id: String,
    start_id: usize,
    start: Cell,
    seed_id: usize,
    distance: f64,
    mode: Mode,
    seed: u64,
}

const STATS_HEADER: [&str; 19] = [
    "id",
    "start",
    "start_row",
    "start_col",
    "seed",
    "distance",
    "mode",
    "status",
    "achieved_distance",
    "opened",
    "closed",
    "wall_time",
    "total_length",
    "curliness",
    "farthest_distance",
    "end_distance",
    "middle_distance",
    "combined_score",
    "points",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerateSummary {
    pub ok: usize,
    pub failed: usize,
}

/// One generation per (start, seed, distance, mode), then subsampling.
pub fn generate(cfg: &RunConfig, ctx: &RunContext) -> Result<GenerateSummary> {
    let art = Artifacts::load(ctx)?;
    let world = &art.world;
    let starts = select_starts(world, ctx.starts(cfg), derive_seed(cfg.seed, STREAM_STARTS));
    let base = derive_seed(cfg.seed, STREAM_GENERATE);
    let mut tasks = Vec::new();
    for (start_id, &start) in starts.iter().enumerate() {
        for seed_id in 0..cfg.seeds {
            for (d_id, &distance) in cfg.distances.iter().enumerate() {
                let k = ((start_id * cfg.seeds + seed_id) * cfg.distances.len() + d_id) as u64;
                let seed = derive_seed(base, k);
                for &mode in &cfg.modes {
                    tasks.push(Task {
                        id: format!("s{start_id}-r{seed_id}-d{distance}-{mode}"),
                        start_id,
                        start,
                        seed_id,
                        distance,
                        mode,
                        seed,
                    });
                }
            }
        }
    }
    let requests = tasks
        .iter()
        .map(|t| request(cfg, &art.landscape, t.start, t.distance, cfg.alpha, cfg.multipliers, t.mode, t.seed))
        .collect::<Result<Vec<_>>>()?;
    let results = generate_batch(world, &requests, ctx.workers);

    let mut stats = Table::new(&STATS_HEADER);
    let mut paths = String::new();
    let mut trajectories = Vec::new();
    let mut summary = GenerateSummary { ok: 0, failed: 0 };
    let dumps = ctx.path("dumps");
    for (task, result) in tasks.iter().zip(results) {
        let mut row = vec![
            task.id.clone(),
            task.start_id.to_string(),
            task.start.row.to_string(),
            task.start.col.to_string(),
            task.seed_id.to_string(),
            task.distance.to_string(),
            task.mode.to_string(),
        ];
        match result {
            Ok(r) => {
                summary.ok += 1;
                let f = extract_features(&r.path)?;
                let traj = subsample(&r.path, &art.spacing, world.cell_size_m(), derive_seed(task.seed, 1))?;
                row.extend([
                    "ok".to_string(),
                    r.achieved_distance.to_string(),
                    r.stats.opened.to_string(),
                    r.stats.closed.to_string(),
                    r.stats.wall_time.to_string(),
                ]);
                row.extend(feature_fields(&f));
                row.push(art.landscape.combined_score(&f).to_string());
                row.push(traj.len().to_string());
                paths.push_str(&format_path(&task.id, &r.path));
                paths.push('\n');
                trajectories.push(RawTrajectory::new(task.id.clone(), traj.to_geo(world.frame()))?);
                if cfg.log_visits {
                    std::fs::create_dir_all(&dumps)?;
                    dump_search_file(&r.stats, &dumps.join(format!("{}.csv", task.id)))?;
                }
            }
            Err(Error::SearchFailed { reason, closed, best_distance, best }) => {
                summary.failed += 1;
                warn!("{}: search failed ({reason})", task.id);
                row.extend([
                    "failed".to_string(),
                    best_distance.to_string(),
                    String::new(),
                    closed.to_string(),
                    String::new(),
                ]);
                match extract_features(&best) {
                    Ok(f) => {
                        row.extend(feature_fields(&f));
                        row.push(art.landscape.combined_score(&f).to_string());
                    }
                    Err(_) => row.extend(std::iter::repeat_n(String::new(), 6)),
                }
                row.push("0".to_string());
            }
            Err(e) => return Err(anyhow!(e).context(format!("generating {}", task.id))),
        }
        stats.row(row);
    }
    std::fs::create_dir_all(&ctx.out)?;
    stats.save(&ctx.path(STATS_FILE))?;
    write(&ctx.path(PATHS_FILE), &paths)?;
    let mut buf = Vec::new();
    write_trajectories(&trajectories, &mut buf)?;
    std::fs::write(ctx.path(TRAJECTORIES_FILE), buf)?;
    info!("generated {} trajectories, {} failures", summary.ok, summary.failed);
    Ok(summary)
}

#[allow(clippy::too_many_arguments)]
fn request<'a>(
    cfg: &RunConfig,
    landscape: &'a RewardLandscape,
    start: Cell,
    distance: f64,
    alpha: AlphaSpec,
    multipliers: MultiplierSet,
    mode: Mode,
    seed: u64,
) -> Result<GenerationRequest<'a>> {
    let mut r = GenerationRequest::new(start, distance, mode, Some(landscape))?;
    r.alpha_policy = alpha.resolve(distance)?;
    r.multipliers = multipliers;
    r.seed = seed;
    r.node_budget = default_budget(distance, cfg.budget_factor);
    r.log_visits = cfg.log_visits;
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Alpha,
    Multipliers,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::Alpha => "alpha",
            SweepKind::Multipliers => "multipliers",
        }
    }
}

const RECORDS_HEADER: [&str; 13] = [
    "start",
    "variant",
    "mode",
    "status",
    "opened",
    "closed",
    "wall_time",
    "total_length",
    "curliness",
    "farthest_distance",
    "end_distance",
    "middle_distance",
    "combined_score",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub dir: PathBuf,
    pub records: usize,
    pub failed: usize,
    pub curves: usize,
}

/// Alpha or multiplier sweep at `sweep_distance` from every start.
pub fn sweep(cfg: &RunConfig, ctx: &RunContext, kind: SweepKind) -> Result<SweepSummary> {
    let art = Artifacts::load(ctx)?;
    let world = &art.world;
    let starts = select_starts(world, ctx.starts(cfg), derive_seed(cfg.seed, STREAM_STARTS));
    let variants: Vec<(f64, AlphaSpec, MultiplierSet)> = match kind {
        SweepKind::Alpha => enumerate_alphas()
            .into_iter()
            .map(|a| (a, AlphaSpec::Percent(a), MultiplierSet::uniform()))
            .collect(),
        SweepKind::Multipliers => {
            let all = enumerate_multipliers();
            let k = ctx.max_permutations.unwrap_or(all.len());
            sample_indices(all.len(), k, derive_seed(cfg.seed, STREAM_PERMUTATIONS))
                .into_iter()
                .map(|i| (i as f64, AlphaSpec::Percent(50.0), all[i]))
                .collect()
        }
    };
    let base = derive_seed(cfg.seed, STREAM_SWEEP);
    let mut keys = Vec::new();
    let mut requests = Vec::new();
    for (start_id, &start) in starts.iter().enumerate() {
        let seed = derive_seed(base, start_id as u64);
        for &(variant, alpha, m) in &variants {
            for &mode in &cfg.modes {
                keys.push((start_id, variant, mode));
                requests.push(request(cfg, &art.landscape, start, cfg.sweep_distance, alpha, m, mode, seed)?);
            }
        }
    }
    let results = generate_batch(world, &requests, ctx.workers);

    let dir = ctx.path(&format!("sweep_{}", kind.name()));
    let mut table = Table::new(&RECORDS_HEADER);
    let mut records = Vec::new();
    let mut paths = String::new();
    let mut failed = 0;
    for (&(start_id, variant, mode), result) in keys.iter().zip(results) {
        let lead = vec![start_id.to_string(), variant.to_string(), mode.to_string()];
        match result {
            Ok(GenerationResult { path, stats, .. }) => {
                let features = extract_features(&path)?;
                let mut row = lead;
                row.extend([
                    "ok".to_string(),
                    stats.opened.to_string(),
                    stats.closed.to_string(),
                    stats.wall_time.to_string(),
                ]);
                row.extend(feature_fields(&features));
                row.push(art.landscape.combined_score(&features).to_string());
                table.row(row);
                paths.push_str(&format_path(&format!("s{start_id}-v{variant}-{mode}"), &path));
                paths.push('\n');
                records.push(SweepRecord {
                    start_id,
                    variant_id: variant,
                    mode,
                    features,
                    stats: SearchStats { visit_log: Vec::new(), ..stats },
                    path,
                });
            }
            Err(Error::SearchFailed { reason, closed, .. }) => {
                failed += 1;
                warn!("start {start_id} variant {variant} {mode}: search failed ({reason})");
                let mut row = lead;
                row.extend(["failed".to_string(), String::new(), closed.to_string()]);
                row.extend(std::iter::repeat_n(String::new(), 7));
                table.row(row);
            }
            Err(e) => return Err(anyhow!(e).context(format!("sweep start {start_id} variant {variant}"))),
        }
    }
    if records.is_empty() {
        bail!("every sweep generation failed");
    }
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    table.save(&dir.join("records.csv"))?;
    write(&dir.join(PATHS_FILE), &paths)?;
    let summary = aggregate_sweep(&records)?;
    let mut buf = Vec::new();
    write_summary(&summary, &mut buf)?;
    std::fs::write(dir.join("summary.csv"), buf)?;

    let curves_dir = dir.join("curves");
    std::fs::create_dir_all(&curves_dir)?;
    let mut curves = 0;
    for start_id in 0..starts.len() {
        for &mode in &cfg.modes {
            let group: Vec<CellPath> = records
                .iter()
                .filter(|r| r.start_id == start_id && r.mode == mode)
                .map(|r| r.path.clone())
                .collect();
            if group.len() < 2 {
                continue;
            }
            let curve = dtw_curve(&group, ctx.workers)?;
            let mut buf = Vec::new();
            curve.write_csv(&mut buf)?;
            std::fs::write(curves_dir.join(format!("start{start_id}_{mode}.csv")), buf)?;
            curves += 1;
        }
    }
    info!("{} sweep: {} records, {failed} failures, {curves} curves", kind.name(), records.len());
    Ok(SweepSummary {
        dir,
        records: records.len(),
        failed,
        curves,
    })
}

const PAIRED_METRICS: [&str; 9] = [
    "combined_score",
    "wall_time",
    "opened",
    "closed",
    "total_length",
    "curliness",
    "farthest_distance",
    "end_distance",
    "middle_distance",
];

/// Paired attraction-vs-feature comparison of a `generate` run.
pub fn eval(ctx: &RunContext) -> Result<usize> {
    let stats = Rows::load(&ctx.path(STATS_FILE))?;
    let paths: std::collections::HashMap<String, CellPath> =
        load_paths(&ctx.path(PATHS_FILE))?.into_iter().collect();

    // (distance bits, start, seed) -> per-mode row index
    let mut pairs: std::collections::BTreeMap<(u64, usize, usize), [Option<usize>; 2]> = Default::default();
    let mut distances: Vec<f64> = Vec::new();
    let mut records = Vec::new();
    for (i, r) in stats.rows.iter().enumerate() {
        if stats.get(r, "status")? != "ok" {
            continue;
        }
        let distance: f64 = stats.num(r, "distance")?;
        let mode: Mode = stats.get(r, "mode")?.parse()?;
        let start: usize = stats.num(r, "start")?;
        let seed: usize = stats.num(r, "seed")?;
        if !distances.contains(&distance) {
            distances.push(distance);
        }
        let slot = pairs.entry((distance.to_bits(), start, seed)).or_default();
        slot[mode as usize] = Some(i);
        let id = stats.get(r, "id")?;
        let path = paths.get(id).ok_or_else(|| anyhow!("no path for {id}"))?.clone();
        records.push(SweepRecord {
            start_id: start,
            variant_id: distance,
            mode,
            features: extract_features(&path)?,
            stats: SearchStats {
                opened: stats.num(r, "opened")?,
                closed: stats.num(r, "closed")?,
                wall_time: stats.num(r, "wall_time")?,
                visit_log: Vec::new(),
            },
            path,
        });
    }
    if records.is_empty() {
        bail!("no successful generations in {}", ctx.path(STATS_FILE).display());
    }
    distances.sort_by(f64::total_cmp);

    let mut out = Table::new(&[
        "distance",
        "metric",
        "n",
        "mean_attraction",
        "mean_feature",
        "w_plus",
        "w_minus",
        "statistic",
        "p_value",
        "exact",
        "status",
    ]);
    let mut rows = 0;
    for &d in &distances {
        let matched: Vec<(usize, usize)> = pairs
            .iter()
            .filter(|(k, _)| k.0 == d.to_bits())
            .filter_map(|(_, v)| Some((v[0]?, v[1]?)))
            .collect();
        for metric in PAIRED_METRICS {
            let mut a = Vec::with_capacity(matched.len());
            let mut f = Vec::with_capacity(matched.len());
            for &(ia, i_f) in &matched {
                a.push(stats.num::<f64>(&stats.rows[ia], metric)?);
                f.push(stats.num::<f64>(&stats.rows[i_f], metric)?);
            }
            let mean = |v: &[f64]| {
                if v.is_empty() {
                    None
                } else {
                    Some(trailforge::eval::mean_std(v).0)
                }
            };
            let mut row = vec![
                d.to_string(),
                metric.to_string(),
                matched.len().to_string(),
                opt(mean(&a)),
                opt(mean(&f)),
            ];
            match wilcoxon_signed_rank(&f, &a) {
                Ok(w) => row.extend([
                    w.w_plus.to_string(),
                    w.w_minus.to_string(),
                    w.statistic.to_string(),
                    w.p_value.to_string(),
                    w.exact.to_string(),
                    "ok".to_string(),
                ]),
                Err(e) => {
                    row.extend(std::iter::repeat_n(String::new(), 5));
                    row.push(match e {
                        Error::DegenerateSample => "degenerate".to_string(),
                        _ => "insufficient".to_string(),
                    });
                }
            }
            out.row(row);
            rows += 1;
        }
    }
    out.save(&ctx.path("eval_wilcoxon.csv"))?;
    let summary = aggregate_sweep(&records)?;
    let mut buf = Vec::new();
    write_summary(&summary, &mut buf)?;
    std::fs::write(ctx.path("eval_summary.csv"), buf)?;
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderKind {
    All,
    Heatmap,
    Landscape,
    Paths,
    Search,
}

/// Writes SVG files under `<out>/svg` and returns their paths.
pub fn render(ctx: &RunContext, kind: RenderKind, input: Option<&Path>) -> Result<Vec<PathBuf>> {
    let dir = ctx.path("svg");
    let mut written = Vec::new();
    let mut emit = |name: String, text: String| -> Result<()> {
        let p = dir.join(name);
        write(&p, &text)?;
        written.push(p);
        Ok(())
    };
    let need = |p: PathBuf| -> Result<PathBuf> {
        if p.is_file() {
            Ok(p)
        } else {
            bail!("input file {} does not exist", p.display())
        }
    };
    let world = || -> Result<GridWorld> {
        let p = need(ctx.path(WORLD_FILE))?;
        load_world(&p).with_context(|| format!("loading {}", p.display()))
    };

    if matches!(kind, RenderKind::All | RenderKind::Heatmap) {
        let w = world()?;
        emit("heatmap.svg".into(), svg::heatmap(&w, &MultiplierSet::uniform()))?;
    }
    if matches!(kind, RenderKind::All | RenderKind::Landscape) {
        let l = RewardLandscape::from_text(&read(&need(ctx.path(LANDSCAPE_FILE))?)?)?;
        let features = load_corpus_features(&need(ctx.path(CORPUS_FEATURES_FILE))?)?;
        for kind in PlaneKind::ALL {
            let pts: Vec<_> = features.iter().map(|f| kind.point(f)).collect();
            emit(format!("landscape_{}.svg", kind.name().replace(',', "_vs_")), svg::landscape_plane(l.plane(kind), &pts))?;
        }
    }
    match kind {
        RenderKind::Paths => {
            let p = need(input.map_or_else(|| ctx.path(PATHS_FILE), Path::to_path_buf))?;
            let w = world()?;
            emit("paths.svg".into(), svg::paths(w.rows(), w.cols(), &load_paths(&p)?))?;
        }
        RenderKind::Search => {
            let p = need(input.map(Path::to_path_buf).ok_or_else(|| anyhow!("render search needs --input <dump.csv>"))?)?;
            let w = world()?;
            let visits = load_search(std::io::BufReader::new(std::fs::File::open(&p)?))
                .with_context(|| format!("dump {}", p.display()))?;
            let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("search");
            emit(format!("search_{stem}.svg"), svg::search(w.rows(), w.cols(), &visits))?;
        }
        RenderKind::All => {
            let p = ctx.path(PATHS_FILE);
            if p.is_file() {
                let w = world()?;
                emit("paths.svg".into(), svg::paths(w.rows(), w.cols(), &load_paths(&p)?))?;
            }
            let dumps = ctx.path("dumps");
            if dumps.is_dir() {
                let w = world()?;
                let mut files: Vec<PathBuf> = std::fs::read_dir(&dumps)?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                    .collect();
                files.sort();
                for f in files {
                    let visits = load_search(std::io::BufReader::new(std::fs::File::open(&f)?))
                        .with_context(|| format!("dump {}", f.display()))?;
                    let stem = f.file_stem().and_then(|s| s.to_str()).unwrap_or("search");
                    emit(format!("search_{stem}.svg"), svg::search(w.rows(), w.cols(), &visits))?;
                }
            }
        }
        _ => {}
    }
    Ok(written)
}

/// Writes a synthetic city (`roads.txt`, `pois.txt`) and a matching
/// `config.txt` into `dir`.
pub fn fixture(dir: &Path, params: FixtureParams, lat: f64, lon: f64) -> Result<()> {
    let f = Fixture::generate(params);
    let (roads, pois) = f.to_geo(lat, lon);
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut buf = Vec::new();
    write_roads(&roads, &mut buf)?;
    std::fs::write(dir.join("roads.txt"), &buf)?;
    buf.clear();
    write_pois(&pois, &mut buf)?;
    std::fs::write(dir.join("pois.txt"), &buf)?;
    let config = format!(
        "# synthetic {rows}x{cols} city, fixture seed {seed}\n\
         poi_file = pois.txt\n\
         road_file = roads.txt\n\
         cell_size_m = {cell}\n\
         corpus_count = 200\n\
         corpus_seed = 1\n\
         starts = 4\n\
         seeds = 3\n\
         distances = 100, 200\n\
         alpha = 50%\n\
         sweep_distance = 100\n\
         seed = 0\n",
        rows = params.rows,
        cols = params.cols,
        seed = params.seed,
        cell = params.cell_size_m,
    );
    write(&dir.join("config.txt"), &config)
}
