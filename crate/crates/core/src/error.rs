use thiserror::Error;

/// Errors raised by the checking and classification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("strategy `{strategy}` does not apply: {reason}")]
    IncompatibleStrategy { strategy: &'static str, reason: String },

    /// Two strict pairs can only coexist when `(m-1)q = (mu-1)p`.
    #[error("pairs ({m}, {p}) and ({mu}, {q}) are incompatible: (m-1)q != (mu-1)p")]
    IncompatiblePairs { m: usize, p: f64, mu: usize, q: f64 },

    #[error("matrix is singular")]
    Singular,

    #[error("orbit vanished at step {step}")]
    OrbitVanished { step: usize },

    /// Two routes that must agree did not; usually a tolerance or horizon problem.
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
