use thiserror::Error;

/// Errors raised by the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole: denominator vanishes at q = {0}")]
    Pole(f64),
    #[error("state space limit exceeded: {0}")]
    Resource(String),
    #[error("contour error: {0}")]
    Contour(String),
    #[error("numerical pole: {0}")]
    NumericalPole(String),
    #[error("consistency error: {0}")]
    Consistency(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
