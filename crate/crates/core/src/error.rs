use thiserror::Error;

use crate::analytic::QuadratureResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature could not meet the requested tolerance.
    #[error(
        "quadrature did not converge: best estimate {} with error {} after {} evaluations ({reason})",
        best.value, best.abs_error_estimate, best.evaluations
    )]
    Convergence {
        best: QuadratureResult,
        reason: String,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
