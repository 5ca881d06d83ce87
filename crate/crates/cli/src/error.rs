use std::fmt;

/// Failure of a command, split by exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration, flag or grid; exit status 2.
    Config(String),
    /// Failure while running or writing output; exit status 3.
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(e) => write!(f, "runtime error: {e:#}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<risctl_core::Error> for CliError {
    fn from(e: risctl_core::Error) -> Self {
        match e {
            risctl_core::Error::Config(m) => CliError::Config(m),
            other => CliError::Runtime(other.into()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
