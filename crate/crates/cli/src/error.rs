use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] structmat::Error),
    #[error("usage: {0}")]
    Usage(String),
    #[error("tolerance exceeded: {0}")]
    Tolerance(String),
}

impl CliError {
    /// 0 success, 1 usage, 2 numerical failure, 3 I/O or parse failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => e.exit_code(),
            CliError::Usage(_) => 1,
            CliError::Tolerance(_) => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
