use thiserror::Error;

/// Errors produced by model construction, analysis, and file parsing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// The marginal measure is identically zero, so no posterior exists.
    #[error("degenerate model: marginal measure is identically zero")]
    DegenerateModel,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid witness: {0}")]
    InvalidWitness(String),

    /// Brute-force oracles refuse instances beyond their enumeration guard.
    #[error("state space too large for exhaustive search: {0}")]
    TooLarge(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
