use thiserror::Error;

/// Failures mapped onto the process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or configuration (exit 1).
    #[error("configuration error: {0}")]
    Config(String),
    /// A run or I/O step failed after the configuration was accepted (exit 3).
    #[error("runtime failure: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }
}

impl From<modecover::Error> for CliError {
    fn from(e: modecover::Error) -> Self {
        use modecover::Error as E;
        match e {
            E::Config(_) | E::Unsupported(_) | E::Csv(_) => CliError::Config(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
