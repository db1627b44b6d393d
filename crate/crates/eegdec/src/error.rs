//! Error type shared across the crate.
//!
//! Errors split into two broad families that map onto the CLI exit codes:
//! validation problems (bad parameters, shapes, files — exit code 1) and
//! numeric failures (non-finite values, degenerate inputs — exit code 2).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EegError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("unsupported upsample: requested {requested_hz} Hz > source {source_hz} Hz")]
    UnsupportedUpsample { requested_hz: f64, source_hz: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid labels: {0}")]
    InvalidLabel(String),

    #[error("unsupported sample size: {0}")]
    UnsupportedSize(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("training diverged: non-finite loss at epoch {epoch}")]
    Divergence { epoch: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl EegError {
    /// CLI exit code for this error: 1 for validation problems, 2 for
    /// numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            EegError::DegenerateData(_)
            | EegError::Numeric(_)
            | EegError::Divergence { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, EegError>;
