use thiserror::Error;

/// Errors raised by the geometry, bounds and integration routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {point:?} lies outside the chart domain or too close to its boundary")]
    OutsideDomain { point: Vec<f64> },

    #[error("metric is not positive definite at {point:?}")]
    NotPositiveDefinite { point: Vec<f64> },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A hypothesis of the estimate being evaluated is violated by the inputs.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("empty sample set")]
    EmptySample,

    #[error("profile error at row {row}: {message}")]
    Profile { row: usize, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
