use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the crate.
///
/// Variants are grouped by category so the CLI can map them onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("state kind mismatch: expected {expected}, found {found}")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("segment [{start}, {end}] out of range for trajectory of length {len}")]
    IndexOutOfRange { start: usize, end: usize, len: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("brute-force search refused: trajectory has {len} frames, limit is {limit}")]
    TooLong { len: usize, limit: usize },

    #[error("no waypoint after t={t} (last waypoint is {last})")]
    NoFutureWaypoint { t: usize, last: usize },

    #[error("{}: parse error at line {line}, column {column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{}: schema error: {message}", path.display())]
    Schema { path: PathBuf, message: String },

    #[error("{}: validation error: {message}", path.display())]
    Validation { path: PathBuf, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
