use std::path::PathBuf;

/// Errors produced by the retrieval engine and its tooling.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("invalid format: {0}")]
    Format(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid query set: {0}")]
    Query(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("item {item} has zero weight to every anchor")]
    Connectivity { item: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("dataset too large for dense manifold ranking: n = {n} exceeds cap {cap}; use the anchor-graph ranker")]
    TooLarge { n: usize, cap: usize },

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("model does not match dataset: {0}")]
    ModelMismatch(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
