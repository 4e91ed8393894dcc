//! Error type shared across the crate.

use std::path::PathBuf;
use thiserror::Error;

/// Errors raised anywhere in the pipeline.
///
/// The CLI maps these onto process exit codes: config/data problems exit 2,
/// missing artifacts exit 3, provider failures exit 4, numeric divergence
/// exits 5.
#[derive(Error, Debug)]
pub enum GlanceError {
    #[error("config error: {0}")]
    Config(String),

    #[error("data error at {path}:{line}: {msg}")]
    Data {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("dimension mismatch: {0}")]
    Dim(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("training diverged at epoch {epoch}")]
    Divergence { epoch: usize },

    #[error("missing artifact: {0}")]
    MissingArtifact(PathBuf),

    #[error("checkpoint hash mismatch for {name}: manifest {expected}, found {actual}")]
    HashMismatch {
        name: String,
        expected: String,
        actual: String,
    },

    #[error("provider error: {0}")]
    Provider(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GlanceError>;

impl GlanceError {
    /// Process exit code for the CLI surface.
    pub fn exit_code(&self) -> i32 {
        match self {
            GlanceError::Config(_) | GlanceError::Data { .. } | GlanceError::Dim(_) => 2,
            GlanceError::MissingArtifact(_) | GlanceError::HashMismatch { .. } => 3,
            GlanceError::Provider(_) => 4,
            GlanceError::Divergence { .. } | GlanceError::NonFinite(_) => 5,
            _ => 1,
        }
    }
}
