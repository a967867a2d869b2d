use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("no admissible affine d: {0}")]
    NoAdmissibleAffineD(String),

    #[error("constraint violation: {what} (admissible interval ({lower}, {upper}), got {value})")]
    ConstraintViolation {
        what: &'static str,
        lower: f64,
        upper: f64,
        value: f64,
    },

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("field shape mismatch: expected {expected} nodes, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("empty quadrature region: {0}")]
    EmptyRegion(String),

    #[error("coefficient {name} must be positive (min value {min})")]
    NonPositiveCoefficient { name: &'static str, min: f64 },

    #[error("inner fixed-point iteration did not converge at time index {step} (last update {residual:e})")]
    InnerIteration { step: usize, residual: f64 },

    #[error("singular linear system (zero pivot at row {row})")]
    SingularSystem { row: usize },

    #[error("P_k is defined for k in {{1, 2}}, got k = {0}")]
    InvalidDirection(u8),

    #[error("overflow guard: s = {s} exceeds the largest admissible s = {max_s}")]
    OverflowGuard { s: f64, max_s: f64 },

    #[error(
        "inputs are not a solution pair: relative residual {residual:e} exceeds {tolerance:e}"
    )]
    NotASolution { residual: f64, tolerance: f64 },

    #[error(
        "Cauchy data on Gamma are not zero: relative mismatch {mismatch:e} exceeds {tolerance:e}"
    )]
    GammaTrace { mismatch: f64, tolerance: f64 },

    #[error("conjugate gradient did not converge in {iterations} iterations (last relative residual {last:e})")]
    CgNotConverged {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("unknown manufactured case `{0}`")]
    UnknownCase(String),

    #[error("empty s-grid")]
    EmptySGrid,

    #[error("time horizon T = {horizon} must exceed 2*delta = {}", 2.0 * delta)]
    Horizon { horizon: f64, delta: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::InvalidGeometry(_)
            | Error::NoAdmissibleAffineD(_)
            | Error::ConstraintViolation { .. }
            | Error::DegenerateGrid(_)
            | Error::UnknownCase(_)
            | Error::EmptySGrid
            | Error::Horizon { .. }
            | Error::OverflowGuard { .. } => 2,
            _ => 1,
        }
    }
}
