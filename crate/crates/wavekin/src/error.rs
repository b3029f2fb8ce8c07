use thiserror::Error;

/// Failure modes shared by every module.
///
/// `Contract` and `Theory` signal that an invariant derived from the theory
/// was violated; the CLI maps them to exit status 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("resource guard exceeded: {0}")]
    Resource(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("theory violation: {0}")]
    Theory(String),
    #[error("numerical failure: {message} (residual {residual:.3e})")]
    Numeric { message: String, residual: f64 },
    #[error("data error: {0}")]
    Data(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors that mean a mathematical invariant failed.
    pub fn is_violation(&self) -> bool {
        matches!(self, Error::Contract(_) | Error::Theory(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
