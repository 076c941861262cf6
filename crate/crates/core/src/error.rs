use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Fatal ingest failures. Per-line defects are reported as
/// [`crate::ingest::ParseIssue`] instead.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{source_name}: read failed: {error}")]
    Io {
        source_name: String,
        #[source]
        error: io::Error,
    },
    #[error("{source_name}: missing required column {column:?}")]
    MissingColumn { source_name: String, column: String },
    #[error("{source_name}: unreadable header: {detail}")]
    Header { source_name: String, detail: String },
}

impl IngestError {
    pub(crate) fn io(source_name: &str, error: io::Error) -> Self {
        IngestError::Io {
            source_name: source_name.to_owned(),
            error,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("cannot open {}: {error}", path.display())]
    Open {
        path: PathBuf,
        #[source]
        error: io::Error,
    },
    #[error("cannot write {}: {error}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        error: io::Error,
    },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{source_name}: {rejected} of {lines} lines rejected, above the ceiling of {ceiling}")]
    IssueCeiling {
        source_name: String,
        rejected: u64,
        lines: u64,
        ceiling: f64,
    },
}

impl PipelineError {
    /// Process exit status: 1 for I/O, 2 for configuration, 3 for schema
    /// violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Open { .. } | PipelineError::Write { .. } => 1,
            PipelineError::Ingest(IngestError::Io { .. }) => 1,
            PipelineError::Ingest(_) => 3,
            PipelineError::Config(_) => 2,
            PipelineError::IssueCeiling { .. } => 3,
        }
    }
}
