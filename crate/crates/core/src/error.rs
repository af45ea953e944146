use std::path::PathBuf;

/// Errors produced by the library. The CLI maps every variant to a data error
/// (exit code 2); usage errors are handled before any of this code runs.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid graph `{id}`: {reason}")]
    InvalidGraph { id: String, reason: String },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("graph `{0}` not found")]
    GraphNotFound(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} is undefined: {reason}")]
    Undefined { what: &'static str, reason: String },

    #[error("prior file schema error: {0}")]
    Schema(String),

    #[error("unsupported prior file version {found} (expected {expected})")]
    Version { found: u64, expected: u64 },

    #[error("query needs |V'| = {v} but the prior table only covers 1..={n_max}")]
    OutOfPriorRange { v: usize, n_max: usize },

    #[error("no modification center found after {0} template attempts")]
    RetriesExhausted(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid_arg(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
