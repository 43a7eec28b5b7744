use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {0} (supported: 2..={max})", max = crate::geometry::MAX_N)]
    UnsupportedDimension(usize),

    #[error("invalid exponent p = {p}: {reason}")]
    InvalidExponent { p: f64, reason: &'static str },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter { name: &'static str, value: f64, reason: String },

    #[error("point outside the domain: {0}")]
    Domain(String),

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("quadrature did not converge: {what} (estimate {error_estimate:e} after {n_evals} evaluations)")]
    NonConvergence { what: String, error_estimate: f64, n_evals: usize },

    #[error("quotient undefined: {0}")]
    Undefined(String),

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("expression error: {0}")]
    Expression(String),

    #[error("fixture error: {0}")]
    Fixture(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, value: f64, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, value, reason: reason.into() }
}
