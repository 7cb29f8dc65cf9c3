use thiserror::Error;

/// Failures raised by the analyses in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("non-finite result at t = {time}")]
    NonFiniteResult { time: f64 },

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("point {0} lies outside the domain")]
    PointOutsideDomain(String),

    #[error("singular resolvent block at lambda = {lambda}, omega = {omega}")]
    SingularSystem { lambda: f64, omega: f64 },

    #[error("energy series contains a non-positive value at index {index}")]
    NonPositiveEnergy { index: usize },

    #[error("energy series is not strictly decreasing at index {index}")]
    NonDecreasingEnergy { index: usize },

    #[error("epsilon = {0} must lie strictly between 0 and 1")]
    EpsilonOutOfRange(f64),

    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),

    #[error("degenerate effective capacity a + eta^2/c = {a_eff} (must be > 0)")]
    DegenerateCapacity { a_eff: f64 },

    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
