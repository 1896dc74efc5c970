use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid objective: {0}")]
    InvalidObjective(String),

    /// The point lies farther from the feasible set than the reflection margin.
    #[error("reflection undefined: distance {distance} exceeds reflection margin {margin}")]
    ReflectionUndefined { distance: f64, margin: f64 },

    #[error("point is not on the boundary (radial gap {gap})")]
    NotOnBoundary { gap: f64 },

    #[error("invalid configuration field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("invalid quadrature grid: {0}")]
    InvalidGrid(String),

    #[error("histogram partition does not match the oracle partition")]
    PartitionMismatch,

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
