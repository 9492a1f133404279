use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum KdvError {
    #[error("parameter constraint violated: {0}")]
    ConstraintViolation(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: {what} has length {found}, expected {expected}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("singular linear system ({context})")]
    Singular { context: String },

    #[error("numerical blow-up at time level {level}: {context}")]
    BlowUp { level: usize, context: String },

    #[error("no convergence after {iterations} iterations (last contraction ratio {last_ratio:.3e}, residuals {residuals:?})")]
    NonConvergence {
        iterations: usize,
        last_ratio: f64,
        residuals: Vec<f64>,
    },

    #[error("Krylov stagnation after {iterations} iterations, relative residual {residual:.3e}")]
    Stagnation {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("three-control feasibility failed: C1 * (1 - a^2 b) = {lhs:.6e} is not in (0, c = {c})")]
    Infeasible { lhs: f64, c: f64 },

    #[error("smallness condition violated: |init| + |target| = {value:.3e} > delta = {delta:.3e}")]
    SmallnessViolated { value: f64, delta: f64 },

    #[error("time series too short: {0} samples (need at least 4)")]
    SeriesTooShort(usize),

    #[error("control configuration mismatch: {0}")]
    ConfigMismatch(String),

    #[error("root refinement failed, worst residual {worst:.3e}")]
    RootRefinement { worst: f64 },

    #[error("Lambert solve failed: {0}")]
    Lambert(String),

    #[error("{0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, KdvError>;

impl From<std::io::Error> for KdvError {
    fn from(err: std::io::Error) -> Self {
        KdvError::Io(err.to_string())
    }
}

pub(crate) fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(KdvError::NonFinite(what.to_string()))
    }
}
