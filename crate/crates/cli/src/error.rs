use causalbench_core::model::Violation;
use causalbench_harness::HarnessError;
use thiserror::Error;

use crate::config::ConfigError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USER: i32 = 1;
pub const EXIT_SERVER: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or input files.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// An error response from the server.
    #[error("{code}: {detail}")]
    Api { status: u16, code: String, detail: String, violations: Vec<Violation> },
    /// The server could not be reached or answered nonsense.
    #[error("server: {0}")]
    Transport(String),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 for mistakes the user can fix, 2 for server and I/O trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => EXIT_USER,
            CliError::Api { status, .. } if *status < 500 => EXIT_USER,
            CliError::Api { .. } | CliError::Transport(_) | CliError::Io(_) => EXIT_SERVER,
            CliError::Harness(e) => match e {
                HarnessError::IncompatibleScenario { .. }
                | HarnessError::Component { .. }
                | HarnessError::InvalidLimits(_)
                | HarnessError::InvalidInstrumentation(_)
                | HarnessError::Model(_) => EXIT_USER,
                _ => EXIT_SERVER,
            },
        }
    }
}

pub fn usage(detail: impl Into<String>) -> CliError {
    CliError::Usage(detail.into())
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
