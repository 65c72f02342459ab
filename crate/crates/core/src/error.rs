use thiserror::Error;

/// Failure modes across the solvers, continuation engine and file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// `c` coincides with the background current somewhere on the grid.
    #[error("critical layer: c = {c} meets U(z) at z = {z}")]
    CriticalLayer { z: f64, c: f64 },

    #[error("no propagating mode: {0}")]
    NoPropagatingMode(String),

    #[error("eigensolver failure: {0}")]
    Solver(String),

    /// The bordered linear system became singular; `partial` holds the
    /// `(t, c)` control points accepted before the failure.
    #[error("continuation breakdown at t = {t}: {reason}")]
    ContinuationBreakdown {
        t: f64,
        reason: String,
        partial: Vec<(f64, f64)>,
    },

    #[error("step budget of {max_steps} exceeded at t = {t}")]
    Budget { max_steps: usize, t: f64 },

    #[error("{value} outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("invalid seed: {0}")]
    InvalidSeed(String),

    #[error("stale seed: pencil residual {residual:e} exceeds {limit:e}")]
    StaleSeed { residual: f64, limit: f64 },

    #[error("degenerate eigenvalue: {0}")]
    DegenerateEigenvalue(String),

    #[error("field construction failed at angles {failed:?}")]
    PartialField { failed: Vec<f64> },

    #[error("schema error in field `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
