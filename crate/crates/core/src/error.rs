use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid cross-section spec: field `{field}`: {reason}")]
    InvalidSpec { field: &'static str, reason: String },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("mass matrix is not positive definite (pivot {pivot} = {value:e})")]
    SingularMass { pivot: usize, value: f64 },

    #[error("factorization failed at shift {shift}: {reason}")]
    Factorization { shift: f64, reason: String },

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("rank-deficient fit: {0}")]
    RankDeficient(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn spec(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidSpec { field, reason: reason.into() }
    }
}
