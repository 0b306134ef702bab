use thiserror::Error;

/// Every failure the core library can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: cannot convert {from} to {to}")]
    DimensionMismatch { from: String, to: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invariant violated in record `{record}`, field `{field}`: {reason}")]
    Invariant {
        record: String,
        field: String,
        reason: String,
    },

    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    #[error("degenerate schedule: {0}")]
    DegenerateSchedule(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no sensitivity: {0}")]
    NoSensitivity(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("time must be finite and >= 0, got {t}")))
    }
}
