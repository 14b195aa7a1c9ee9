use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = QhaError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum QhaError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("operands live on different truncated models ({left} vs {right})")]
    ParamsMismatch { left: String, right: String },

    #[error("non-finite value {value} at quadrature node {node:?}")]
    NonFinite { node: Vec<Complex64>, value: Complex64 },

    #[error("window instability: result changed by {change:.3e} (> {tolerance:.1e}) when the window was doubled from {window}")]
    WindowInstability {
        window: f64,
        change: f64,
        tolerance: f64,
    },

    #[error("linear system is singular even after raising the ridge to {ridge:.3e}")]
    Singular { ridge: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
