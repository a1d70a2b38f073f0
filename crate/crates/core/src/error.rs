use thiserror::Error;

use crate::nonlinear::FixedPointReport;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum BackusError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point outside the admissible domain: {0}")]
    Domain(String),

    #[error("singular input: {0}")]
    Singular(String),

    #[error("length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("grid too coarse: {0}")]
    Resolution(String),

    #[error("symmetry violation: {0}")]
    Symmetry(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("non-polynomial particular solution required: {0}")]
    Resonance(String),

    #[error("fixed-point iteration did not converge after {} iterations", .report.iterations)]
    Divergence { report: Box<FixedPointReport> },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, BackusError>;
