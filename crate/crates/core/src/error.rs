use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("root finder did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("coincident positions: {0}")]
    CoincidentPosition(String),

    #[error("angular response is not real-valued (residual {residual:e}); unsupported correlation matrix")]
    UnsupportedCorrelation { residual: f64 },

    #[error("invalid scenario: {}", .0.join("; "))]
    InvalidScenario(Vec<String>),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("allowed region is empty after exclusions")]
    EmptyRegion,

    #[error("no candidate positions survived the lobe and small-scale filters")]
    EmptyCandidates,

    #[error("grid of {points} points exceeds the budget of {budget}")]
    BudgetExceeded { points: usize, budget: usize },

    #[error("queue is unstable for every s on the search grid")]
    Unstable,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
