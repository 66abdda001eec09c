use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("quadrature did not reach tolerance: {0}")]
    QuadratureNotConverged(String),
    #[error("tail fit rejected: {0}")]
    TailFitRejected(String),
    #[error("numerical guard: {0}")]
    NumericalGuard(String),
    #[error("did not converge: {0}")]
    NonConvergence(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("malformed data: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
