use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical failure: {0} (residual estimate {1:.3e})")]
    Numerical(String, f64),
    #[error("ill-conditioned coefficient recovery (condition estimate {0:.3e})")]
    IllConditioned(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
