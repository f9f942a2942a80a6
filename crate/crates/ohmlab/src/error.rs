//! CLI-level errors with their process exit codes.

use std::io;

use thiserror::Error;

/// Exit codes: 1 precondition, 2 numerical non-convergence, 3 I/O.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] ohmlab_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Parse(String),
    #[error("experiment row aborted: {0}")]
    RowAborted(String),
    #[error("verification failed: {0} check(s) red")]
    VerifyFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(ohmlab_core::Error::NonConvergence { .. }) => 2,
            CliError::Io(_) => 3,
            CliError::VerifyFailed(_) => 1,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
