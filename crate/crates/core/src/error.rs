//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by simulation, problem loading, and solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// A run was requested with a zero tick/iteration budget.
    #[error("budget must be at least 1 tick")]
    ZeroBudget,

    /// A readout or decode was requested past the end of a trace.
    #[error("tick {tick} is beyond the trace end ({end})")]
    TickOutOfRange { tick: u64, end: u64 },

    /// A value fell outside its documented range.
    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },

    /// Vector/matrix dimensions do not match the instance.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Structural constraint violated while building a network or instance.
    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    /// A parse failure carrying the 1-based line number where it occurred.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Instance too large for exhaustive enumeration.
    #[error("instance too large for brute force: {0}")]
    TooLarge(String),

    /// Solver input incompatible with the operation (e.g. non-3-CNF for the SAT net).
    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    pub(crate) fn structure(msg: impl Into<String>) -> Self {
        Error::InvalidStructure(msg.into())
    }
}
