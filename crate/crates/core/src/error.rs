use std::path::PathBuf;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain where a model is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A fitted model produced a value that makes the computation meaningless
    /// (for example a non-positive efficiency).
    #[error("model error: {0}")]
    Model(String),

    /// A configuration document violates one of its invariants.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A weight vector or policy does not match the expected network shape.
    #[error("architecture mismatch: {0}")]
    Architecture(String),

    /// Scenario data could not be ingested.
    #[error("{path}: row {row}: {message}")]
    Load {
        path: String,
        row: usize,
        message: String,
    },

    #[error("file not found: {0}")]
    NotFound(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by bad user input (files, formats, shapes) as
    /// opposed to failures while computing.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Architecture(_)
                | Error::Load { .. }
                | Error::NotFound(_)
                | Error::Json(_)
                | Error::Csv(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
