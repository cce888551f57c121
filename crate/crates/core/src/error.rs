use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector must have at least one component")]
    EmptyVector,

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("iteration limit of {max_iter} reached with residual {residual:e}")]
    MaxIterExceeded { max_iter: usize, residual: f64 },

    #[error(
        "residual stagnated after {retries} Lipschitz-bound doublings (last L = {lipschitz:e})"
    )]
    Stagnation { retries: usize, lipschitz: f64 },

    #[error("non-positive curvature {curvature:e} at CG iteration {iteration}; operator is not monotone")]
    IndefinitenessDetected { iteration: usize, curvature: f64 },

    #[error("operator failed monotonicity audit: min ratio {min_ratio:e}")]
    NotMonotone { min_ratio: f64 },

    #[error("bracketing gave up after {steps} steps at a = {alpha:e}")]
    MaxBracketSteps { steps: usize, alpha: f64 },

    #[error("singular system: {0}")]
    Singular(String),
}
