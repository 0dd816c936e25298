use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric at ({i}, {j}): {a} != {b}")]
    NotSymmetric { i: usize, j: usize, a: f64, b: f64 },

    #[error("matrix has a nonzero diagonal entry at index {index}: {value}")]
    NonZeroDiagonal { index: usize, value: f64 },

    #[error("matrix row {row} has length {len}, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("problem carries a nonzero bias; absorb it into the couplings first")]
    BiasPresent,

    #[error("invalid spin value {value} at index {index}; spins must be +1 or -1")]
    InvalidSpin { index: usize, value: i8 },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite {quantity} at step {step}")]
    NonFinite { step: usize, quantity: &'static str },

    #[error("{n} spins exceeds the exhaustive-search cap of {cap}")]
    OracleCap { n: usize, cap: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bench spec {path}: {message}")]
    Spec { path: String, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by bad input (malformed files, invalid
    /// parameters) as opposed to failures while solving or writing results.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::NotSymmetric { .. }
                | Error::NonZeroDiagonal { .. }
                | Error::NotSquare { .. }
                | Error::DimensionMismatch { .. }
                | Error::BiasPresent
                | Error::InvalidSpin { .. }
                | Error::InvalidConfig(_)
                | Error::InvalidParameter(_)
                | Error::OracleCap { .. }
                | Error::Parse { .. }
                | Error::Spec { .. }
        ) || matches!(self, Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound)
    }
}
