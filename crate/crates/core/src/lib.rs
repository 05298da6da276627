//! Distance-bounded, attraction-guided trajectory synthesis on road grids.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod eval;
pub mod features;
pub mod fixtures;
pub mod geo;
pub mod geom;
pub mod ingest;
pub mod landscape;
pub mod par;
pub mod persist;
pub mod planner;
pub mod postprocess;
pub mod world;

pub use error::{Error, Result};
pub use features::{extract_features, group_metrics, FeatureVector, GroupMetrics, IncrementalFeatures};
pub use landscape::{fit_landscape, LandscapeParams, RewardLandscape};
pub use planner::{generate, AlphaPolicy, AlphaSpec, GenerationRequest, GenerationResult, Mode, SearchStats};
pub use world::{Cell, CellPath, GridWorld, MultiplierSet, Poi, Tag};
