use std::path::PathBuf;

use crate::optimizer::RunRecord;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid configuration (bad parameter values, malformed config files).
    #[error("configuration error: {0}")]
    Config(String),

    /// API misuse, e.g. dimension mismatches.
    #[error("usage error: {0}")]
    Usage(String),

    /// A requested accuracy cannot be certified under the declared adversary.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The iterate blew up; carries the partial trajectory.
    #[error("divergence at iteration {iteration}")]
    Divergence {
        iteration: usize,
        partial: Box<RunRecord>,
    },

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
