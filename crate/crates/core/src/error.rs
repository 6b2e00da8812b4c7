use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected n = {expected}, found n = {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("lambda = {lambda} lies outside the resolvable band |lambda| <= {limit}")]
    BandViolation { lambda: f64, limit: f64 },

    #[error("lambda = 0 is the degenerate ray; use the Bessel kernel")]
    DegenerateRay,

    #[error("spectral table holds raw values; convert to normalized values first")]
    RawTable,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("the zero function is not admissible here")]
    ZeroFunction,

    #[error("check not applicable: {0}")]
    Inapplicable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
