use thiserror::Error;

/// Failures surfaced by the numeric kernels and the sampler.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("3F2 series diverges at unit argument (margin {0})")]
    Divergent(f64),
    #[error("series did not converge within {terms} terms")]
    NonConvergence { terms: usize },
    #[error("integrand not finite at node {at}")]
    NonFinite { at: f64 },
    #[error("quadrature missed tolerance: value {value}, error estimate {error}")]
    Quadrature { value: f64, error: f64 },
    #[error("refused: {0}")]
    Refused(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("chain invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
