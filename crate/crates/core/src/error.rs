use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cutoff rho = {rho} coincides with eigenvalue lambda_{j} = {lambda}")]
    AmbiguousCutoff { rho: f64, j: usize, lambda: f64 },

    #[error("shift gamma = {gamma} resonates with eigenvalue lambda_{j} = {lambda}")]
    Resonance { gamma: f64, j: usize, lambda: f64 },

    #[error("invalid shift configuration: {0}")]
    InvalidGains(String),

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("invalid window [{a}, {b}]: {reason}")]
    InvalidWindow { a: f64, b: f64, reason: &'static str },

    #[error("grid with m = {m} is too coarse (need m >= {required})")]
    GridTooCoarse { m: usize, required: usize },

    #[error("state violates boundary compatibility: {0}")]
    BoundaryMismatch(String),

    #[error("step size {dt} exceeds the limit {limit}")]
    StepSize { dt: f64, limit: f64 },

    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("linear solver breakdown: {0}")]
    SolverBreakdown(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}
