use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The affine constraint set is empty: the least-squares solution misses
    /// the right-hand side by `residual`.
    #[error("infeasible constraint system (least-squares residual {residual:.3e})")]
    Infeasible { residual: f64 },

    /// Basis pursuit returned the zero vector, so the direction is undefined.
    #[error("degenerate solution: {0}")]
    Degenerate(String),

    /// A sweep stopped before every cell was computed.
    #[error("sweep incomplete: {done} of {total} cells done")]
    Incomplete { done: usize, total: usize },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
