//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("vector is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("matrix is not an isometry (max deviation of U\u{2020}U from I = {deviation:.3e})")]
    NotIsometry { deviation: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("invalid witness: {0}")]
    InvalidWitness(String),

    #[error("degenerate (zero) vector passed to the hyperplane estimator")]
    DegenerateVector,

    #[error("vector norm {norm} exceeds the plan cap {cap}; the norm bound fed to the plan was wrong")]
    CapExceeded { norm: f64, cap: f64 },

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("malformed protocol: {0}")]
    MalformedProtocol(String),

    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),

    #[error("unknown measurement index {index} (family has {len})")]
    UnknownMeasurement { index: usize, len: usize },

    #[error("estimation failure: raw probability mass {total} is below 1/2")]
    EstimationFailure { total: f64 },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid file: {0}")]
    InvalidFormat(String),
}
