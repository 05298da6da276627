//! Trajectory reward landscape.
//!
//! Each of three feature-pair planes carries an outer convex hull around all
//! corpus points and an inner hull around the z-score inliers. A feature
//! point scores `max_trf` on the inner plateau, its distance to the inner
//! hull between the two hulls, and minus its distance to the outer hull
//! outside both.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::features::{FeatureVector, IncrementalFeatures};
use crate::geom::{ConvexPolygon, Point2};

pub const DEFAULT_MAX_TRF: f64 = 100.0;
pub const DEFAULT_Z_THRESHOLD: f64 = 2.0;

/// Feature pair spanned by a plane, as (x axis, y axis).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlaneKind {
    CurlinessLength,
    CurlinessFarthest,
    FarthestLength,
}

impl PlaneKind {
    pub const ALL: [PlaneKind; 3] = [
        PlaneKind::CurlinessLength,
        PlaneKind::CurlinessFarthest,
        PlaneKind::FarthestLength,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlaneKind::CurlinessLength => "curliness,total_length",
            PlaneKind::CurlinessFarthest => "curliness,farthest_distance",
            PlaneKind::FarthestLength => "farthest_distance,total_length",
        }
    }

    pub fn axes(self) -> (&'static str, &'static str) {
        let (x, y) = self.name().split_once(',').unwrap();
        (x, y)
    }

    /// Coordinates of a (length, curliness, farthest) triple in this plane.
    pub fn project(self, length: f64, curliness: f64, farthest: f64) -> Point2 {
        match self {
            PlaneKind::CurlinessLength => Point2::new(curliness, length),
            PlaneKind::CurlinessFarthest => Point2::new(curliness, farthest),
            PlaneKind::FarthestLength => Point2::new(farthest, length),
        }
    }

    pub fn point(self, f: &FeatureVector) -> Point2 {
        self.project(f.total_length as f64, f.curliness, f.farthest_distance)
    }
}

/// Scoring rule between the inner and outer hull.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrfMiddle {
    /// `d(a, P_I)`: grows with distance from the inner hull.
    #[default]
    Literal,
    /// `max_trf - d(a, P_I)`: decreases away from the plateau.
    Inward,
}

impl fmt::Display for TrfMiddle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrfMiddle::Literal => "literal",
            TrfMiddle::Inward => "inward",
        })
    }
}

impl FromStr for TrfMiddle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "literal" => Ok(TrfMiddle::Literal),
            "inward" => Ok(TrfMiddle::Inward),
            other => Err(Error::invalid(format!("unknown trf_middle {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandscapePlane {
    pub kind: PlaneKind,
    pub outer_hull: ConvexPolygon,
    pub inner_hull: ConvexPolygon,
    pub max_trf: f64,
    pub middle: TrfMiddle,
}

impl LandscapePlane {
    /// Trajectory reward of a 2-d feature point.
    pub fn trf(&self, a: Point2) -> f64 {
        if self.inner_hull.contains(a) {
            self.max_trf
        } else if self.outer_hull.contains(a) {
            let d = self.inner_hull.edge_distance(a);
            match self.middle {
                TrfMiddle::Literal => d,
                TrfMiddle::Inward => self.max_trf - d,
            }
        } else {
            -self.outer_hull.edge_distance(a)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewardLandscape {
    pub planes: [LandscapePlane; 3],
    pub max_trf: f64,
    pub z_threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapeParams {
    pub max_trf: f64,
    pub z_threshold: f64,
    pub middle: TrfMiddle,
}

impl Default for LandscapeParams {
    fn default() -> Self {
        Self {
            max_trf: DEFAULT_MAX_TRF,
            z_threshold: DEFAULT_Z_THRESHOLD,
            middle: TrfMiddle::Literal,
        }
    }
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Fits one plane: outer hull of every point, inner hull of the points whose
/// per-axis z-scores both lie within `z_threshold`.
pub fn fit_plane(kind: PlaneKind, points: &[Point2], params: &LandscapeParams) -> Result<LandscapePlane> {
    let outer_hull = ConvexPolygon::hull(points).ok_or_else(|| {
        Error::DegenerateLandscape(format!("plane {} has collinear or too few points", kind.name()))
    })?;
    let (mx, sx) = mean_std(points.iter().map(|p| p.x));
    let (my, sy) = mean_std(points.iter().map(|p| p.y));
    let z_ok = |v: f64, m: f64, s: f64| s == 0.0 || ((v - m) / s).abs() <= params.z_threshold;
    let inliers: Vec<Point2> = points
        .iter()
        .copied()
        .filter(|p| z_ok(p.x, mx, sx) && z_ok(p.y, my, sy))
        .collect();
    if inliers.len() < 3 {
        return Err(Error::DegenerateLandscape(format!(
            "plane {} has {} inliers, need at least 3",
            kind.name(),
            inliers.len()
        )));
    }
    let inner_hull = ConvexPolygon::hull(&inliers).ok_or_else(|| {
        Error::DegenerateLandscape(format!("plane {} inliers are collinear", kind.name()))
    })?;
    Ok(LandscapePlane {
        kind,
        outer_hull,
        inner_hull,
        max_trf: params.max_trf,
        middle: params.middle,
    })
}

pub fn fit_landscape(corpus: &[FeatureVector], params: &LandscapeParams) -> Result<RewardLandscape> {
    if !(params.max_trf > 0.0) {
        return Err(Error::invalid("max_trf must be positive"));
    }
    if !(params.z_threshold > 0.0) {
        return Err(Error::invalid("z_threshold must be positive"));
    }
    let plane = |kind: PlaneKind| {
        let pts: Vec<Point2> = corpus.iter().map(|f| kind.point(f)).collect();
        fit_plane(kind, &pts, params)
    };
    Ok(RewardLandscape {
        planes: [
            plane(PlaneKind::CurlinessLength)?,
            plane(PlaneKind::CurlinessFarthest)?,
            plane(PlaneKind::FarthestLength)?,
        ],
        max_trf: params.max_trf,
        z_threshold: params.z_threshold,
    })
}

impl RewardLandscape {
    pub fn plane(&self, kind: PlaneKind) -> &LandscapePlane {
        &self.planes[PlaneKind::ALL.iter().position(|&k| k == kind).unwrap()]
    }

    pub fn middle(&self) -> TrfMiddle {
        self.planes[0].middle
    }

    /// Sum of the three plane rewards at a (length, curliness, farthest) triple.
    pub fn score(&self, length: f64, curliness: f64, farthest: f64) -> f64 {
        self.planes
            .iter()
            .map(|p| p.trf(p.kind.project(length, curliness, farthest)))
            .sum()
    }

    pub fn combined_score(&self, f: &FeatureVector) -> f64 {
        self.score(f.total_length as f64, f.curliness, f.farthest_distance)
    }

    pub fn score_partial(&self, f: &IncrementalFeatures) -> f64 {
        self.score(f.total_length() as f64, f.curliness(), f.farthest_distance())
    }

    /// Text form with every number written to 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# reward landscape").unwrap();
        writeln!(s, "max_trf = {}", fmt17(self.max_trf)).unwrap();
        writeln!(s, "z_threshold = {}", fmt17(self.z_threshold)).unwrap();
        writeln!(s, "trf_middle = {}", self.middle()).unwrap();
        for p in &self.planes {
            writeln!(s, "plane = {}", p.kind.name()).unwrap();
            writeln!(s, "outer = {}", vertex_list(&p.outer_hull)).unwrap();
            writeln!(s, "inner = {}", vertex_list(&p.inner_hull)).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut max_trf = None;
        let mut z_threshold = None;
        let mut middle = TrfMiddle::Literal;
        let mut planes: Vec<(PlaneKind, Option<ConvexPolygon>, Option<ConvexPolygon>)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::parse(line_no, "expected key = value"))?;
            let num = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| Error::parse(line_no, format!("bad number {v:?}")))
            };
            match key {
                "max_trf" => max_trf = Some(num(value)?),
                "z_threshold" => z_threshold = Some(num(value)?),
                "trf_middle" => middle = value.parse().map_err(|e: Error| Error::parse(line_no, e.to_string()))?,
                "plane" => {
                    let kind = PlaneKind::ALL
                        .into_iter()
                        .find(|k| k.name() == value)
                        .ok_or_else(|| Error::parse(line_no, format!("unknown plane {value:?}")))?;
                    planes.push((kind, None, None));
                }
                "outer" | "inner" => {
                    let poly = parse_vertices(value, line_no)?;
                    let slot = planes
                        .last_mut()
                        .ok_or_else(|| Error::parse(line_no, "hull before plane"))?;
                    if key == "outer" {
                        slot.1 = Some(poly);
                    } else {
                        slot.2 = Some(poly);
                    }
                }
                other => return Err(Error::parse(line_no, format!("unknown key {other:?}"))),
            }
        }
        let max_trf = max_trf.ok_or_else(|| Error::parse(0, "missing max_trf"))?;
        let z_threshold = z_threshold.ok_or_else(|| Error::parse(0, "missing z_threshold"))?;
        let mut built = Vec::with_capacity(3);
        for kind in PlaneKind::ALL {
            let (_, outer, inner) = planes
                .iter()
                .find(|p| p.0 == kind)
                .cloned()
                .ok_or_else(|| Error::parse(0, format!("missing plane {}", kind.name())))?;
            built.push(LandscapePlane {
                kind,
                outer_hull: outer.ok_or_else(|| Error::parse(0, "missing outer hull"))?,
                inner_hull: inner.ok_or_else(|| Error::parse(0, "missing inner hull"))?,
                max_trf,
                middle,
            });
        }
        let planes: [LandscapePlane; 3] = built.try_into().expect("three planes");
        Ok(Self {
            planes,
            max_trf,
            z_threshold,
        })
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn vertex_list(poly: &ConvexPolygon) -> String {
    poly.vertices()
        .iter()
        .map(|p| format!("{} {}", fmt17(p.x), fmt17(p.y)))
        .collect::<Vec<_>>()
        .join("; ")
}

fn parse_vertices(value: &str, line: usize) -> Result<ConvexPolygon> {
    let mut pts = Vec::new();
    for pair in value.split(';') {
        let mut it = pair.split_whitespace();
        let (Some(x), Some(y), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::parse(line, format!("bad vertex {pair:?}")));
        };
        let x: f64 = x.parse().map_err(|_| Error::parse(line, format!("bad number {x:?}")))?;
        let y: f64 = y.parse().map_err(|_| Error::parse(line, format!("bad number {y:?}")))?;
        pts.push(Point2::new(x, y));
    }
    ConvexPolygon::from_ccw(pts).ok_or_else(|| Error::parse(line, "hull is not a convex CCW ring"))
}
