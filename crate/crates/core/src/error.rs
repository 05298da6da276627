use thiserror::Error;

use crate::world::CellPath;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no navigable cells")]
    NoNavigableCells,

    #[error("degenerate bounding box")]
    DegenerateBounds,

    #[error("cell ({row}, {col}) is outside the {rows}x{cols} grid")]
    OutOfBounds {
        row: i64,
        col: i64,
        rows: usize,
        cols: usize,
    },

    #[error("cell ({row}, {col}) is not a road cell")]
    NotRoad { row: usize, col: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("no road path between trajectory points {from} and {to}")]
    Unreachable { from: usize, to: usize },

    #[error("degenerate path")]
    DegeneratePath,

    #[error("degenerate landscape: {0}")]
    DegenerateLandscape(String),

    #[error("degenerate sigma")]
    DegenerateSigma,

    #[error("degenerate: all paired differences are zero")]
    DegenerateSample,

    #[error("feature mode requires a reward landscape")]
    MissingLandscape,

    #[error("search stopped after {closed} expansions ({reason}); best partial path reached distance {best_distance:.3}")]
    SearchFailed {
        reason: &'static str,
        closed: usize,
        best_distance: f64,
        best: CellPath,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
