//! Turning contiguous cell paths into sparse, GPS-like trajectories.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use crate::error::{Error, Result};
use crate::geo::{GeoFrame, GeoPoint};
use crate::world::{Cell, CellPath};

/// Lognormal distribution of distances (meters) between recorded points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacingModel {
    pub mu: f64,
    pub sigma: f64,
}

impl SpacingModel {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::invalid("spacing mu must be finite"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::DegenerateSigma);
        }
        Ok(Self { mu, sigma })
    }

    /// Moment inversion from a linear-space mean and standard deviation.
    pub fn from_moments(mean: f64, std: f64) -> Result<Self> {
        if !(mean > 0.0) || !(std > 0.0) {
            return Err(Error::invalid("moments must be positive"));
        }
        let s2 = (1.0 + (std * std) / (mean * mean)).ln();
        Self::new(mean.ln() - s2 / 2.0, s2.sqrt())
    }

    pub fn mean(&self) -> f64 {
        (self.mu + self.sigma * self.sigma / 2.0).exp()
    }

    pub fn std(&self) -> f64 {
        let s2 = self.sigma * self.sigma;
        ((s2.exp() - 1.0) * (2.0 * self.mu + s2).exp()).sqrt()
    }

    fn distribution(&self) -> LogNormal<f64> {
        LogNormal::new(self.mu, self.sigma).expect("sigma validated at construction")
    }

    /// Reproducible stream of spacing draws for a seed.
    pub fn draws(&self, seed: u64) -> impl Iterator<Item = f64> {
        let dist = self.distribution();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        std::iter::repeat_with(move || dist.sample(&mut rng))
    }
}

impl fmt::Display for SpacingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# lognormal spacing model (meters)")?;
        writeln!(f, "mu = {:.16e}", self.mu)?;
        writeln!(f, "sigma = {:.16e}", self.sigma)
    }
}

impl FromStr for SpacingModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (mut mu, mut sigma) = (None, None);
        for (i, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, "expected key = value"))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::parse(i + 1, "bad number"))?;
            match k.trim() {
                "mu" => mu = Some(v),
                "sigma" => sigma = Some(v),
                other => return Err(Error::parse(i + 1, format!("unknown key {other:?}"))),
            }
        }
        match (mu, sigma) {
            (Some(mu), Some(sigma)) => Self::new(mu, sigma),
            _ => Err(Error::parse(0, "spacing model needs mu and sigma")),
        }
    }
}

/// Maximum-likelihood lognormal fit: mean and population standard
/// deviation of the log samples.
pub fn fit_spacing(samples: &[f64]) -> Result<SpacingModel> {
    if samples.len() < 2 {
        return Err(Error::invalid("spacing fit needs at least 2 samples"));
    }
    if let Some(bad) = samples.iter().find(|&&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::invalid(format!("spacing sample {bad} must be positive")));
    }
    let n = samples.len() as f64;
    let logs: Vec<f64> = samples.iter().map(|s| s.ln()).collect();
    let mu = logs.iter().sum::<f64>() / n;
    let var = logs.iter().map(|l| (l - mu) * (l - mu)).sum::<f64>() / n;
    // relative guard so constant inputs do not yield rounding-noise sigma
    if var.sqrt() <= 1e-12 * mu.abs().max(1.0) {
        return Err(Error::DegenerateSigma);
    }
    SpacingModel::new(mu, var.sqrt())
}

/// Sparse subsequence of a cell path; `indices` point into the source path.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub cells: Vec<Cell>,
    pub indices: Vec<usize>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn to_geo(&self, frame: &GeoFrame) -> Vec<GeoPoint> {
        self.cells.iter().map(|&c| frame.to_geo(c)).collect()
    }

    /// Along-path distances in meters between consecutive kept points.
    pub fn gaps(&self, path: &CellPath, cell_size_m: f64) -> Vec<f64> {
        let prefix = prefix_distances(path);
        self.indices
            .windows(2)
            .map(|w| (prefix[w[1]] - prefix[w[0]]) * cell_size_m)
            .collect()
    }
}

fn prefix_distances(path: &CellPath) -> Vec<f64> {
    let mut out = Vec::with_capacity(path.len());
    let mut acc = 0.0;
    for (i, &c) in path.cells.iter().enumerate() {
        if i > 0 {
            acc += path.cells[i - 1].step_cost(c);
        }
        out.push(acc);
    }
    out
}

/// Keeps a cell whenever the along-path distance since the last kept cell
/// reaches the current spacing draw, then draws again. The first and last
/// cells are always kept.
pub fn subsample(path: &CellPath, model: &SpacingModel, cell_size_m: f64, seed: u64) -> Result<Trajectory> {
    subsample_with(path, cell_size_m, model.draws(seed))
}

/// Same as [`subsample`] with an explicit spacing stream.
pub fn subsample_with(
    path: &CellPath,
    cell_size_m: f64,
    mut draws: impl Iterator<Item = f64>,
) -> Result<Trajectory> {
    if path.len() < 2 {
        return Err(Error::DegeneratePath);
    }
    if !(cell_size_m > 0.0) {
        return Err(Error::invalid("cell size must be positive"));
    }
    let cells = &path.cells;
    let last = cells.len() - 1;
    let mut indices = vec![0];
    let mut acc = 0.0;
    let mut next = draws.next().unwrap_or(f64::INFINITY);
    for i in 1..last {
        acc += cells[i - 1].step_cost(cells[i]) * cell_size_m;
        if acc >= next {
            indices.push(i);
            acc = 0.0;
            next = draws.next().unwrap_or(f64::INFINITY);
        }
    }
    indices.push(last);
    Ok(Trajectory {
        cells: indices.iter().map(|&i| cells[i]).collect(),
        indices,
    })
}
