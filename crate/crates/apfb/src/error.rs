use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("gamma = {0} is outside the open interval (0, 2)")]
    GammaOutOfRange(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integrand is not positive at r = {r}")]
    NegativeIntegrand { r: f64 },

    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),

    #[error("bisection bracket failure on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("linear solve stalled after {iterations} iterations, residual {residual:e}")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("need at least {needed} free boundary points, found {found}")]
    TooFewPoints { needed: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
