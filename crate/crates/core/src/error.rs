use thiserror::Error;

/// Errors produced by `terracini-core`.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Capability(String),

    #[error("iterated scaling did not converge after {iterations} iterations (last |nabla| = {last:e})")]
    NotConverged {
        iterations: usize,
        last: f64,
        trace: Vec<f64>,
    },

    #[error("decomposition failed: {0}")]
    DecompositionFailed(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
