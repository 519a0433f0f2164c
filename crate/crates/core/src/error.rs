use std::io;

use thiserror::Error;

/// Errors produced anywhere in the crate.
///
/// Variants map onto the CLI exit codes: configuration problems exit with 2,
/// data problems with 3 and numerical failures with 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("forest fit failed: {0}")]
    Fit(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) => 2,
            Error::Data(_) | Error::Fit(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_) => 3,
            Error::Numerical(_) => 4,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
