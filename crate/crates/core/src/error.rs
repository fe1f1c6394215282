use thiserror::Error;

/// Errors raised by state constructors, channels and fidelity routes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Fock index {index} out of range for truncation {dim}")]
    OutOfRange { index: usize, dim: usize },

    #[error("truncation at dim {dim} loses weight {lost:.3e} (tolerance {tol:.1e})")]
    Truncation { dim: usize, lost: f64, tol: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("accuracy error: {what} = {value:.3e} exceeds {limit:.1e}; {hint}")]
    Accuracy {
        what: &'static str,
        value: f64,
        limit: f64,
        hint: &'static str,
    },

    #[error("dimension {dim} exceeds the guard {max} for two-mode work")]
    DimensionGuard { dim: usize, max: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
