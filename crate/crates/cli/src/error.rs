use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] mosr_core::Error),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// Process exit code: 2 for configuration problems, 3 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Dataset(DatasetError::Open { .. }) => 3,
            _ => 2,
        }
    }
}

/// Problems reading a dataset CSV. Row numbers count data rows from 1.
#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {}: {source}", path.display())]
    Open {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed header: {0}")]
    Header(String),
    #[error("no data rows")]
    NoRows,
    #[error("row {row}, column {column}: `{cell}` is not a number")]
    Cell { row: usize, column: String, cell: String },
    #[error("row {row}: {got} fields, expected {expected}")]
    Width { row: usize, expected: usize, got: usize },
    #[error("row {row}: {msg}")]
    Csv { row: usize, msg: String },
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
