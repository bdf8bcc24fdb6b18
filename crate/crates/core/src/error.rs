use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Numerical and validation failures of the simulation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate-frequency drive: beat frequency is zero, use the stationary-state path")]
    DegenerateFrequency,

    #[error("step-size underflow at t = {t} ps (requested step {step:e} ps)")]
    StepSizeUnderflow { t: f64, step: f64 },

    #[error("state invalid: {0}")]
    StateInvalid(String),

    #[error("no convergence to a periodic steady state after {periods} periods (residual {residual:e})")]
    NoConvergence { periods: usize, residual: f64 },

    #[error("non-unique steady state: Liouvillian null space has dimension {dim}")]
    NonUniqueSteadyState { dim: usize },

    #[error("eigensolver failure: no convergence after {iterations} iterations")]
    EigensolverFailure { iterations: usize },

    #[error("tail not converged: |C(tau_max)|/|C(0)| = {ratio:e} at tau_max = {tau_max} ps")]
    TailNotConverged { ratio: f64, tau_max: f64 },

    #[error("window out of range: [{lo}, {hi}] not inside the grid")]
    WindowOutOfRange { lo: f64, hi: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("grid too coarse: step {step} μeV must be below fwhm/4 = {limit} μeV")]
    GridTooCoarse { step: f64, limit: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
