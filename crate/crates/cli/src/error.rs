// SPDX-License-Identifier: Apache-2.0

use srff_puf::PufError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("corrupt dataset: {0}")]
    Corrupt(String),
    #[error("{0} of {1} sweep cells failed")]
    Sweep(usize, usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io(_) => 2,
            CliError::Corrupt(_) => 3,
            CliError::Sweep(..) => 4,
        }
    }

    pub fn from_core(e: PufError) -> Self {
        match e {
            PufError::Io(e) => CliError::Io(e.to_string()),
            PufError::CorruptDataset(m) => CliError::Corrupt(m),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
