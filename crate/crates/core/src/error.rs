use std::path::PathBuf;

use thiserror::Error;

use crate::optimizers::OptimizerResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("row {0} is the zero vector")]
    ZeroRow(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("matrix of dimension {dim} exceeds the supported cap of {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },

    #[error("matrix is not symmetric (|M(i,j) - M(j,i)| = {defect:e})")]
    NotSymmetric { defect: f64 },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("{what} failed to converge after {iterations} iterations")]
    ConvergenceFailure { what: &'static str, iterations: usize },

    #[error("maximin optimizer did not reach the requested gap after {} iterations (gap {:e})", .0.iterations, .0.certificate_gap)]
    MaximinNotConverged(Box<OptimizerResult>),

    #[error("matrix does not have full column rank (sigma_min / sigma_max = {ratio:e})")]
    RankDeficient { ratio: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("design vector sums to zero")]
    ZeroDesign,

    #[error("t must be positive, got {0}")]
    NonPositiveT(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerics, as opposed to bad input or IO.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::ConvergenceFailure { .. }
                | Error::MaximinNotConverged(_)
                | Error::RankDeficient { .. }
        )
    }
}
