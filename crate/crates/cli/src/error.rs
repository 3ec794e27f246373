use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] sumgap_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    /// 0 success, 2 config or domain error, 3 guard violation, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        use sumgap_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::Guard { .. }) => 3,
            CliError::Core(E::Domain(_) | E::Precondition(_) | E::NoData(_)) => 2,
            CliError::Io(_) | CliError::Internal(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}
