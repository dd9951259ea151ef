use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("support violation: {0}")]
    Support(String),
    #[error("field has nonzero mean {0:e}; the projection symbol is undefined at zero frequency")]
    NonzeroMean(f64),
    #[error("integrability gate failed: {0}")]
    Gate(String),
    #[error("divergent integral: {0}")]
    Divergent(String),
    #[error("parameter outside admissible range: {0}")]
    Admissibility(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
