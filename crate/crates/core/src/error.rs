use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid design space: {0}")]
    InvalidSpace(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point outside the extended box in dimension {dim}: {value} not in [{low}, {high}]")]
    OutOfBounds {
        dim: usize,
        value: f64,
        low: f64,
        high: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("duplicate training rows {0} and {1}")]
    DuplicateRows(usize, usize),

    #[error("covariance factorization failed even with nugget {0:e}")]
    NotPositiveDefinite(f64),

    #[error("undefined quantity: {0}")]
    Undefined(String),

    #[error("evaluation failed at x = {x:?}: {reason}")]
    Evaluation { x: Vec<f64>, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed artifact {path}: {reason}")]
    Artifact { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn artifact(path: impl Into<PathBuf>, reason: impl ToString) -> Self {
        Error::Artifact {
            path: path.into(),
            reason: reason.to_string(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
