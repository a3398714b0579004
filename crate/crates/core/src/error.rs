use thiserror::Error;

/// Errors surfaced by scenario construction, file parsing, and the runtime.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("empirical distribution has no observations")]
    EmptyDistribution,

    #[error("state space mismatch: {0}")]
    StateSpaceMismatch(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
