use thiserror::Error;

/// Errors raised by tensor, network and factorization routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: bad shapes, labels, permutations, partitions.
    #[error("validation error: {0}")]
    Validation(String),
    /// A numerical precondition failed or a kernel did not converge.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// An exact cost exceeded 2^63.
    #[error("cost overflow: {0}")]
    CostOverflow(String),
    /// Problem too large for the requested algorithm.
    #[error("size error: {0}")]
    Size(String),
    /// Malformed `.tnt` or manifest file.
    #[error("format error: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// True for failures caused by the numbers themselves rather than by
    /// malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
