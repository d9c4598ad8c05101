use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Variants are split by *why* a computation was refused so that callers
/// (and the CLI) can decide whether a retry with other inputs makes sense.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("iteration did not converge after {iterations} steps (last update {last_update:.3e})")]
    NotConverged { iterations: usize, last_update: f64 },

    #[error("insufficient accuracy: {0}")]
    Accuracy(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("argument out of range: {0}")]
    Range(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("parameters outside the admissible regime: {0}")]
    OutsideRegime(String),

    #[error("parity error: {0}")]
    Parity(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("checksum mismatch (expected {expected}, found {found})")]
    Checksum { expected: String, found: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Returns `Err(NonFinite)` if `x` is NaN or infinite.
pub(crate) fn ensure_finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}
