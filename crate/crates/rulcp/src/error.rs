use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot read {}", path.display())]
    ReadInput {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed input {}", path.display())]
    Malformed {
        path: PathBuf,
        #[source]
        source: rulcp_core::Error,
    },
    #[error("malformed CSV {}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("cannot write {}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("experiment failed")]
    Experiment(#[from] rulcp_core::Error),
}

impl CliError {
    /// 2 for bad configuration or input, 1 for failures after validation.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_)
            | CliError::ReadInput { .. }
            | CliError::Malformed { .. }
            | CliError::Csv { .. } => 2,
            CliError::Write { .. } | CliError::Experiment(_) => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
