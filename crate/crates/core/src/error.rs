use thiserror::Error;

pub type Result<T> = std::result::Result<T, BeamError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BeamError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point x = {x} lies outside the domain [0, {length}]")]
    OutOfDomain { x: f64, length: f64 },

    #[error("divergence at t = {time}: first non-finite mode is {mode}")]
    Divergence { mode: usize, time: f64 },

    #[error("no plateau: tail spread {spread:.3e} is not below 10% of the transient drop {drop:.3e}; run longer")]
    NonPlateau { spread: f64, drop: f64 },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular Jacobian in Newton step {iteration}")]
    SingularJacobian { iteration: usize },

    #[error("no (C, delta) pair on the search grid satisfies the stability inequality (best C needed {best_c:.3e})")]
    Infeasible { best_c: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("degenerate scale range: {0}")]
    DegenerateRange(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("io: {0}")]
    Io(String),
}

impl BeamError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        BeamError::InvalidInput(msg.into())
    }

    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            BeamError::DimensionMismatch { .. } => "dimension_mismatch",
            BeamError::OutOfDomain { .. } => "out_of_domain",
            BeamError::Divergence { .. } => "divergence",
            BeamError::NonPlateau { .. } => "non_plateau",
            BeamError::NoConvergence { .. } => "no_convergence",
            BeamError::SingularJacobian { .. } => "singular_jacobian",
            BeamError::Infeasible { .. } => "infeasible",
            BeamError::InsufficientData(_) => "insufficient_data",
            BeamError::EmptyCloud => "empty_cloud",
            BeamError::DegenerateRange(_) => "degenerate_range",
            BeamError::InvalidInput(_) => "invalid_input",
            BeamError::Config { .. } => "config",
            BeamError::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for BeamError {
    fn from(e: std::io::Error) -> Self {
        BeamError::Io(e.to_string())
    }
}

impl From<csv::Error> for BeamError {
    fn from(e: csv::Error) -> Self {
        BeamError::Io(e.to_string())
    }
}
