use thiserror::Error;

/// Errors produced by model construction, integration, and experiments.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad caller input: dimension mismatches, out-of-range parameters,
    /// malformed episode definitions.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A state vector or integrator intermediate stopped being finite.
    #[error("numerical blowup at t = {time}")]
    NumericalBlowup { time: f64 },

    /// Fixed-point iteration ran out of iterations before the residual
    /// dropped below tolerance.
    #[error("fixed-point search did not converge after {iterations} iterations (residual {residual:e})")]
    ConvergenceFailure { residual: f64, iterations: usize },

    /// Online training diverged.
    #[error("training failed in epoch {epoch}: {reason}")]
    TrainingFailure { epoch: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
