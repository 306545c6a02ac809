use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value {value} at node {index} (x = {x})")]
    NonFinite { index: usize, x: f64, value: f64 },

    #[error("field has {got} values but the grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("tail window rejected: {0}")]
    Window(String),

    #[error("tail below floor: only {usable} usable nodes in window")]
    TailBelowFloor { usable: usize },

    #[error("{0} does not decay fast enough toward the domain ends")]
    TailsNotDecaying(&'static str),

    #[error(transparent)]
    Solver(#[from] SolverError),

    #[error(transparent)]
    Flow(#[from] FlowError),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid parameter `{key}`: {message}")]
    Parameter { key: String, message: String },

    #[error("i/o failure on {path}: {message}")]
    Io { path: String, message: String },
}

/// Failure modes of the time integrator. The state passed to the failing
/// step is untouched and remains the last good state.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("blow-up or instability detected at t = {t}: {detail}")]
    BlowUp { t: f64, detail: String },

    #[error("blow-up or instability detected at t = {t}: time step {dt:e} underflowed")]
    StepUnderflow { t: f64, dt: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("flow degenerated: Jacobian {jac} for label {label} at t = {t}")]
    Degenerated { label: f64, t: f64, jac: f64 },

    #[error("velocity record does not cover t = {0}")]
    OutsideRecord(f64),

    #[error("label {0} is not tracked")]
    UnknownLabel(f64),
}
