use thiserror::Error;

/// Errors produced by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("lambda must be at least 2, got {0}")]
    LambdaTooSmall(usize),

    #[error("expected {expected} alpha parameters, got {got}")]
    AlphaLength { expected: usize, got: usize },

    #[error("alpha parameters must sum to zero, got sum {sum:e}")]
    AlphaSum { sum: f64 },

    #[error(
        "structure function F({mu}) = beta_{mu} + {mu} = {value} must be positive \
         (partial sums of alpha must exceed -mu; for lambda = 2 this is alpha_0 > -1)"
    )]
    NonPositiveStructure { mu: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("truncation n_max = {n_max} too small: {reason}")]
    TruncationTooSmall { n_max: usize, reason: String },

    #[error("truncation insufficient: tail term {tail:e} exceeds tolerance at n_max = {n_max}")]
    TruncationInsufficient { n_max: usize, tail: f64 },

    #[error("series did not converge after {terms} terms")]
    SeriesNonConvergence { terms: usize },

    #[error("quadrature did not converge after {subdivisions} subdivisions (error estimate {error:e})")]
    QuadratureNonConvergence { subdivisions: usize, error: f64 },

    #[error("polynomial fit residual {residual:e} in sector {mu} exceeds {tol:e}")]
    FitResidual { mu: usize, residual: f64, tol: f64 },

    #[error("casimir not constant in sector {mu}: spread {spread:e}")]
    NonConstantCasimir { mu: usize, spread: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
