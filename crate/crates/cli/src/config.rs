//! Flat `key = value` run configuration.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use trailforge::landscape::TrfMiddle;
use trailforge::planner::AlphaSpec;
use trailforge::{Mode, MultiplierSet};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub poi_file: PathBuf,
    pub road_file: PathBuf,
    pub cell_size_m: f64,
    /// Real trajectories to map onto the grid; synthetic corpus when absent.
    pub corpus_file: Option<PathBuf>,
    pub corpus_count: usize,
    pub corpus_mean_steps: f64,
    pub corpus_seed: u64,
    pub max_trf: f64,
    pub z_threshold: f64,
    pub trf_middle: TrfMiddle,
    /// Used only when the corpus carries no usable point spacing.
    pub spacing_mean_m: f64,
    pub spacing_std_m: f64,
    pub starts: usize,
    pub seeds: usize,
    /// Target distances in cells.
    pub distances: Vec<f64>,
    pub alpha: AlphaSpec,
    pub multipliers: MultiplierSet,
    pub modes: Vec<Mode>,
    /// Expansion budget per unit of target distance.
    pub budget_factor: f64,
    pub sweep_distance: f64,
    pub log_visits: bool,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            poi_file: PathBuf::from("pois.txt"),
            road_file: PathBuf::from("roads.txt"),
            cell_size_m: 10.0,
            corpus_file: None,
            corpus_count: 300,
            corpus_mean_steps: 200.0,
            corpus_seed: 1,
            max_trf: 100.0,
            z_threshold: 2.0,
            trf_middle: TrfMiddle::default(),
            spacing_mean_m: 18.6,
            spacing_std_m: 35.9,
            starts: 15,
            seeds: 30,
            distances: vec![100.0, 200.0, 400.0],
            alpha: AlphaSpec::Percent(50.0),
            multipliers: MultiplierSet::uniform(),
            modes: Mode::ALL.to_vec(),
            budget_factor: 50.0,
            sweep_distance: 200.0,
            log_visits: false,
            seed: 0,
        }
    }
}

fn list<T>(v: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    v.split(',').map(|s| f(s.trim())).collect()
}

fn num<T: std::str::FromStr>(v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| anyhow!("bad value {v:?}: {e}"))
}

fn flag(v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => bail!("bad boolean {v:?}"),
    }
}

impl RunConfig {
    /// Parses config text; relative file paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut c = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", i + 1))?;
            let (k, v) = (k.trim(), v.trim());
            c.set(k, v, base).with_context(|| format!("line {}: {k}", i + 1))?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).with_context(|| format!("config {}", path.display()))
    }

    fn set(&mut self, k: &str, v: &str, base: &Path) -> Result<()> {
        let path = |v: &str| base.join(v);
        match k {
            "poi_file" => self.poi_file = path(v),
            "road_file" => self.road_file = path(v),
            "cell_size_m" => self.cell_size_m = num(v)?,
            "corpus_file" => self.corpus_file = (!v.is_empty()).then(|| path(v)),
            "corpus_count" => self.corpus_count = num(v)?,
            "corpus_mean_steps" => self.corpus_mean_steps = num(v)?,
            "corpus_seed" => self.corpus_seed = num(v)?,
            "max_trf" => self.max_trf = num(v)?,
            "z_threshold" => self.z_threshold = num(v)?,
            "trf_middle" => self.trf_middle = v.parse().map_err(|e| anyhow!("{e}"))?,
            "spacing_mean_m" => self.spacing_mean_m = num(v)?,
            "spacing_std_m" => self.spacing_std_m = num(v)?,
            "starts" => self.starts = num(v)?,
            "seeds" => self.seeds = num(v)?,
            "distances" => self.distances = list(v, num)?,
            "alpha" => self.alpha = v.parse().map_err(|e| anyhow!("{e}"))?,
            "multipliers" => {
                let vals: Vec<f64> = list(v, num)?;
                let arr: [f64; 6] = vals
                    .try_into()
                    .map_err(|_| anyhow!("multipliers need six values"))?;
                self.multipliers = MultiplierSet::new(arr).map_err(|e| anyhow!("{e}"))?;
            }
            "modes" => self.modes = list(v, |s| s.parse::<Mode>().map_err(|e| anyhow!("{e}")))?,
            "budget_factor" => self.budget_factor = num(v)?,
            "sweep_distance" => self.sweep_distance = num(v)?,
            "log_visits" => self.log_visits = flag(v)?,
            "seed" => self.seed = num(v)?,
            _ => bail!("unknown key"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cell_size_m > 0.0) {
            bail!("cell_size_m must be positive");
        }
        if self.distances.is_empty() || self.distances.iter().any(|d| !(*d > 0.0)) {
            bail!("distances must be positive");
        }
        if !(self.sweep_distance > 0.0) {
            bail!("sweep_distance must be positive");
        }
        if self.seeds == 0 || self.starts == 0 || self.corpus_count == 0 {
            bail!("seeds, starts and corpus_count must be at least 1");
        }
        if self.modes.is_empty() {
            bail!("modes must not be empty");
        }
        if !(self.budget_factor > 0.0) {
            bail!("budget_factor must be positive");
        }
        Ok(())
    }

    /// Input files that `build` will read.
    pub fn check_inputs(&self) -> Result<()> {
        let mut files = vec![&self.poi_file, &self.road_file];
        files.extend(self.corpus_file.as_ref());
        for f in files {
            if !f.is_file() {
                bail!("input file {} does not exist", f.display());
            }
        }
        Ok(())
    }
}
