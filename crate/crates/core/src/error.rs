use alloc::string::String;
use alloc::vec::Vec;

/// Errors reported by the solver core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unsupported degree {degree} (supported range {min}..={max})")]
    UnsupportedDegree { degree: usize, min: usize, max: usize },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("problem data error: {0}")]
    Data(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("singular matrix (pivot {pivot} at row {row})")]
    SingularMatrix { row: usize, pivot: f64 },

    #[error("linear solver did not converge: relative residual {residual:e} after {iterations} iterations")]
    LinearSolver { iterations: usize, residual: f64 },

    #[error("Newton iteration diverged at iteration {iteration}: {reason}")]
    Diverged { iteration: usize, reason: String },

    #[error("Newton iteration did not converge in {} iterations (last residual {:e})", .history.len().saturating_sub(1), .history.last().copied().unwrap_or(f64::NAN))]
    NotConverged { history: Vec<f64> },

    #[error("effectivity index undefined: error norm {error_norm:e} is numerically zero")]
    UndefinedEffectivity { error_norm: f64 },

    #[error("unknown problem '{name}' (available: {})", .available.join(", "))]
    UnknownProblem { name: String, available: Vec<&'static str> },

    #[error("problem '{0}' has no exact solution")]
    MissingExactSolution(String),

    #[error("adaptive level {level}: {source}")]
    AtLevel {
        level: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

impl Error {
    pub(crate) fn at_level(self, level: usize) -> Self {
        Error::AtLevel { level, source: alloc::boxed::Box::new(self) }
    }
}
