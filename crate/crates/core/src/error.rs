use thiserror::Error;

/// Errors raised by the simulation engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported pulse kind: {0}")]
    UnsupportedKind(&'static str),
    #[error("invalid rate {name} = {value}")]
    InvalidRate { name: &'static str, value: f64 },
    #[error("invalid pulse: {0}")]
    InvalidPulse(String),
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("step size underflow at t = {t} (h = {h:e})")]
    Stiffness { t: f64, h: f64 },
    #[error("integration failure: {0}")]
    IntegrationFailure(String),
    #[error("no root in bracket: {0}")]
    NoRoot(String),
    #[error("grids are incompatible: {0}")]
    IncompatibleGrids(String),
    #[error("wrong correlation kind: expected {expected:?}")]
    WrongKind { expected: crate::dynamics::CorrelationKind },
    #[error("division guard: {0}")]
    DivisionGuard(String),
    #[error("input not normalized: {0}")]
    Normalization(String),
    #[error("shift of {steps} steps out of range for {n} points")]
    ShiftRange { steps: i64, n: usize },
    #[error("undefined estimate: {0}")]
    UndefinedEstimate(String),
    #[error("invalid splitter: {0}")]
    InvalidSplitter(String),
    #[error("invalid detection model: {0}")]
    InvalidDetection(String),
    #[error("malformed data: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
