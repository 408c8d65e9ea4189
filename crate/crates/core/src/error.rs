use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("gamma function pole at {0}")]
    Pole(f64),
    #[error("series did not converge within {terms} terms")]
    SeriesNonConvergence { terms: usize },
    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),
    #[error("evaluation too close to a singular point: {0}")]
    Singular(String),
    #[error("sampler failure: {0}")]
    Sampler(String),
    #[error("independent evaluations disagree: {0}")]
    Inconsistent(String),
}

impl Error {
    /// Bad input as opposed to a numerical breakdown.
    pub fn is_parameter_error(&self) -> bool {
        matches!(self, Error::InvalidParameter(_) | Error::Pole(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
