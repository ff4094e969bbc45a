use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the interpolation, tuning and experiment code.
#[derive(Debug, Error)]
pub enum PumError {
    /// A precondition on the inputs was violated.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Cholesky factorization failed at every jitter level of the ladder.
    #[error("singular system of size {size}: factorization failed up to jitter {max_jitter:e}")]
    SingularSystem { size: usize, max_jitter: f64 },

    #[error("subdomain centered at {center:?} holds no data points")]
    EmptySubdomain { center: Vec<f64> },

    #[error("insufficient points: need at least {needed}, found {found}")]
    InsufficientPoints { needed: usize, found: usize },

    /// No partition-of-unity weight is positive at the query point.
    #[error("point {point:?} is not covered by any subdomain")]
    UncoveredPoint { point: Vec<f64> },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

pub type Result<T, E = PumError> = std::result::Result<T, E>;
