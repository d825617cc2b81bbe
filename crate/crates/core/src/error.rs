use thiserror::Error;

/// Errors raised by state construction, propagation and protocol analytics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid N00N specification: {0}")]
    InvalidSpec(String),
    #[error("mode error: {0}")]
    Mode(String),
    #[error("mode {mode} would hold {count} photons (limit {limit})")]
    PhotonLimit { mode: String, count: u32, limit: u32 },
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("parity mismatch: {0}")]
    Parity(String),
    #[error("target unattainable: {0}")]
    Unattainable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
