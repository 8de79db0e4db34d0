//! Error type shared by every numeric routine in the crate.

use std::fmt;

/// Errors from series evaluation, operator application, and solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Parameters outside the domain of the operation (e.g. `alpha <= 0`).
    InvalidParams(String),
    /// A series did not reach the requested tolerance within the term
    /// budget, or floating-point cancellation destroyed the requested
    /// number of digits.
    NonConvergence(String),
    /// An exact-algebra operation would produce a term outside the
    /// Mittag-Leffler term algebra (exponent parameter `mu` would drop
    /// to zero or below).
    LeavesAlgebra(String),
    /// Adaptive quadrature exhausted its subdivision budget.
    QuadratureFailure(String),
    /// Chebyshev interpolation failed its halving convergence check.
    InterpolationFailure(String),
    /// The input function does not advertise enough classical
    /// derivatives for the requested operation.
    InsufficientSmoothness(String),
    /// A Riemann-Liouville initial value does not exist as a finite limit.
    DivergentInitialValue(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParams(m) => write!(f, "invalid parameters: {m}"),
            Error::NonConvergence(m) => write!(f, "series did not converge: {m}"),
            Error::LeavesAlgebra(m) => write!(f, "operation leaves the ML term algebra: {m}"),
            Error::QuadratureFailure(m) => write!(f, "quadrature failure: {m}"),
            Error::InterpolationFailure(m) => write!(f, "interpolation failure: {m}"),
            Error::InsufficientSmoothness(m) => write!(f, "insufficient smoothness: {m}"),
            Error::DivergentInitialValue(m) => write!(f, "divergent initial value: {m}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
