//! Error type shared by all core operations.

use thiserror::Error;

/// Errors produced by core operations.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A caller-supplied parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {message}")]
    Parameter { name: &'static str, message: String },

    /// An input value is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation left the representable floating-point range.
    #[error("numeric overflow: {0}")]
    Overflow(String),

    /// The operation is documented as out of scope for this input class.
    #[error("unsupported capability: {0}")]
    Unsupported(String),

    /// An externally supplied function or table could not be evaluated.
    #[error("input error: {0}")]
    Input(String),
}

impl CoreError {
    pub fn parameter(name: &'static str, message: impl Into<String>) -> Self {
        CoreError::Parameter {
            name,
            message: message.into(),
        }
    }
}

pub type CoreResult<T> = Result<T, CoreError>;
