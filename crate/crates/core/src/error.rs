use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected} attributes, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("segment [{start}, {end}] is not in the entropy cache (max length {max_len})")]
    UncachedSegment {
        start: usize,
        end: usize,
        max_len: usize,
    },

    #[error("invalid cover: {0}")]
    InvalidCover(String),

    #[error("edges do not form a path: {0}")]
    NotAPath(String),

    #[error("column {column} has no ones; cosine similarity is undefined")]
    ZeroColumn { column: usize },

    #[error("eigensolver did not converge (residual {residual:e})")]
    EigenNoConvergence { residual: f64 },

    #[error("score list is empty")]
    EmptyScores,

    #[error("combined score variance is zero")]
    ZeroVariance,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
