use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] dps_core::DpsError),

    #[error("io error: {0}")]
    Io(String),
}

impl HarnessError {
    /// CLI exit code: 2 for config/setup problems, 3 for numeric aborts.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core(dps_core::DpsError::NonFinite(_)) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
