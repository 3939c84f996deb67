use thiserror::Error;

/// Failures reported by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no eigenvalue is tabulated for even mode {0}")]
    UnsupportedMode(usize),
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("arch is not bistable")]
    NotBistable,
    #[error("Newton iteration diverged at delta = {delta} (residual {residual:e})")]
    NewtonDivergence { delta: f64, residual: f64 },
    #[error("load is orthogonal to the soft mode (gain {0:e})")]
    DegenerateReduction(f64),
    #[error("argument {0} is outside the supported range")]
    OverflowGuard(f64),
    #[error("trajectory evaluated at or beyond its pole")]
    BeyondPole,
    #[error("step size underflow at t = {0}")]
    StepSizeUnderflow(f64),
    #[error("step budget exhausted at t = {0}")]
    TooManySteps(f64),
    #[error("no switching before t = {0}")]
    MaxTimeExceeded(f64),
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
    #[error("time series does not contain a switching event")]
    NoSwitching,
}

pub type Result<T> = core::result::Result<T, Error>;
