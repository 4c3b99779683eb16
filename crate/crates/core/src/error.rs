//! Error type shared by every model in the crate.

use thiserror::Error;

/// Unified error for model construction, validation, and evaluation.
#[derive(Debug, Error)]
pub enum SimError {
    /// A physical or numeric argument is outside its valid domain
    /// (non-positive resistance, negative trial count, voltage out of range, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Two containers that must agree in shape do not
    /// (weight matrix vs. input vector, code lists of different lengths, ...).
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A configuration file or section is malformed or inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An operation that needs fitted constants was invoked on a
    /// configuration whose `[calibration]` block is absent.
    #[error("uncalibrated configuration: {0}")]
    Uncalibrated(String),

    /// The calibration routine cannot reach a requested target within the
    /// search bounds of the model.
    #[error("calibration target unreachable: {0}")]
    Unreachable(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, SimError>;
