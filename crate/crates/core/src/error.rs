use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates the operation's preconditions.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("SVD did not converge for a {rows}x{cols} matrix")]
    Convergence { rows: usize, cols: usize },

    /// Malformed `DT3 v1` input.
    #[error("format error at byte offset {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("reference has zero Frobenius norm")]
    ZeroNorm,

    #[error("resource guard exceeded: {0}")]
    ResourceGuard(String),

    #[error("{context}: {source}")]
    Replicate {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
