use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("constraint index {index} out of range (problem has {count} constraints)")]
    ConstraintIndex { index: usize, count: usize },

    #[error("non-finite objective value at x = {x:?}")]
    NonFiniteObjective { x: Vec<f64> },

    #[error("non-finite value for constraint {index} at x = {x:?}")]
    NonFiniteConstraint { index: usize, x: Vec<f64> },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
