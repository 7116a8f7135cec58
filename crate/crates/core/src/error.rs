use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Every refusal carries the violated precondition in its message so that
/// reports can quote it verbatim.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("symbol is not elliptic: min P on the sphere is {min:.6e} at {witness:?}")]
    NotElliptic { min: f64, witness: Vec<f64> },

    #[error("level surface is not convex: margin {margin:.3e} at pair {witness:?}")]
    NotConvex {
        margin: f64,
        witness: (Vec<f64>, Vec<f64>),
    },

    #[error("type detection failed: sum of directional derivatives up to order m is {value:.3e} <= delta_min {delta_min:.3e} at xi={xi:?}, eta={eta:?}")]
    TypeDetection {
        value: f64,
        delta_min: f64,
        xi: Vec<f64>,
        eta: Vec<f64>,
    },

    #[error("inadmissible exponents: {0}")]
    Inadmissible(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
