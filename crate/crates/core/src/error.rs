use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied an invalid argument (bad node id, impossible size, ...).
    #[error("invalid input: {0}")]
    Input(String),

    /// An internal or caller-side contract was broken (mismatched dimensions,
    /// illegal perturbation, trace/model mismatch).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A text file did not conform to its format.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// A non-finite value showed up in an optimization loop.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Refused to run an exhaustive search that would be too large.
    #[error("search too large: {0}")]
    TooLarge(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
