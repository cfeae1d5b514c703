use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}: file has no data rows")]
    Empty(PathBuf),
    #[error("{path}: line {line} has {found} cells, expected {expected}")]
    RaggedRow {
        path: PathBuf,
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("{path}: line {line}, column {column}: `{cell}` is not a number")]
    NonNumeric {
        path: PathBuf,
        line: u64,
        column: usize,
        cell: String,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{0}")]
    Invalid(#[from] kmo_core::Error),
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("infeasible instance: k + z = {needed} but n = {n}")]
    Infeasible { needed: u64, n: u64 },
    #[error(transparent)]
    Core(#[from] kmo_core::Error),
    #[error("run failed: {0}")]
    Run(String),
    #[error("output: {0}")]
    Output(#[from] std::io::Error),
    #[error("output: {0}")]
    Json(#[from] serde_json::Error),
    #[error("output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Infeasible { .. } => 4,
            _ => 1,
        }
    }
}
