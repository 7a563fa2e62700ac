use alloc::string::String;
use core::fmt;

/// Errors shared by all numerical modules.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    Domain(String),
    /// A measure or config failed validation at construction.
    InvalidMeasure(String),
    /// Adaptive quadrature stopped before reaching the requested tolerance.
    /// Carries the best achieved absolute error estimate.
    QuadratureTolerance { achieved: f64, requested: f64 },
    /// The requested evaluation route does not apply to this measure.
    RouteMismatch(String),
    /// Numerical Laplace inversion did not stabilise.
    InversionUnstable(String),
    /// A subordinator path never exceeded the requested physical time.
    InsufficientHorizon { target: f64, reached: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::InvalidMeasure(msg) => write!(f, "invalid mixing measure: {msg}"),
            Error::QuadratureTolerance { achieved, requested } => write!(
                f,
                "quadrature did not converge: achieved {achieved:e}, requested {requested:e}"
            ),
            Error::RouteMismatch(msg) => write!(f, "route/measure mismatch: {msg}"),
            Error::InversionUnstable(msg) => write!(f, "laplace inversion unstable: {msg}"),
            Error::InsufficientHorizon { target, reached } => write!(
                f,
                "subordinator path reached {reached}, below target time {target}"
            ),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
