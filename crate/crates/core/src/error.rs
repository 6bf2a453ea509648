use thiserror::Error;

/// Errors produced across the simulator and the statistics toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("mean of series is zero")]
    MeanZero,

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("singular design matrix")]
    Singular,

    #[error("fit did not converge after {iterations} iterations (best rmse {rmse})")]
    FitFailure {
        iterations: usize,
        amplitude: f64,
        timescale: f64,
        stretch: f64,
        rmse: f64,
    },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
