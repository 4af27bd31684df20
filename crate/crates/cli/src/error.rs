use thiserror::Error;

/// Process exit status for a clean run.
pub const EXIT_OK: i32 = 0;
/// Bad arguments, unreadable or invalid configuration.
pub const EXIT_CONFIG: i32 = 1;
/// Failure while simulating or writing results.
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<marsim_core::Error> for CliError {
    fn from(e: marsim_core::Error) -> Self {
        match e {
            marsim_core::Error::Parse { .. } | marsim_core::Error::InvalidConfig(_) => CliError::Config(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
