//! Error type shared by the core modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("grid size {0} is invalid: must be a power of two and at least 8")]
    InvalidGridSize(usize),

    #[error("field contains a non-finite sample at index {0}")]
    NonFiniteSample(usize),

    #[error("Lebesgue exponent p = {0} is out of range (need p >= 1)")]
    InvalidLebesgueExponent(f64),

    #[error("factors have mismatched grid sizes: {0} vs {1}")]
    GridMismatch(usize, usize),

    #[error("product arity {0} is out of range (need 2..=7)")]
    InvalidProductArity(usize),

    #[error("mean of |u|^2 - mu is {0:.3e}, exceeds 1e-8: primitive is not periodic")]
    NonPeriodicPrimitive(f64),

    #[error("scale-separation constant lambda = {0} must exceed 1")]
    InvalidLambda(f64),

    #[error("stepper config invalid: {0}")]
    InvalidStepper(String),

    #[error("non-finite value detected during evolution; last valid time t = {last_valid_time}")]
    NumericalAbort { last_valid_time: f64 },

    #[error("trajectory does not satisfy '{0}'")]
    BadTrajectory(String),

    #[error("smoothing parameters invalid: {0}")]
    InvalidSmoothingParams(String),

    #[error("unknown estimate id '{0}'")]
    UnknownEstimate(String),

    #[error("trial count {0} too small (need at least 30)")]
    TooFewTrials(usize),
}
