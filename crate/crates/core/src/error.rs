use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The matrix handed to `weights_from_laplacian` is not a graph Laplacian.
    #[error("not a Laplacian: entry ({row}, {col}) = {value} ({reason})")]
    NotALaplacian {
        row: usize,
        col: usize,
        value: f64,
        reason: &'static str,
    },

    #[error("gradient requested at a point where Lx + J is not positive definite")]
    MissingFactorization,

    #[error("failed to draw a connected Erdos-Renyi graph with edge_prob = {edge_prob} after {attempts} attempts")]
    GenerationFailure { edge_prob: f64, attempts: usize },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
