use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    /// A bad flag or environment value.
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] hpl::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit status: 3 for capacity errors, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(hpl::Error::Capacity { .. }) => 3,
            _ => 1,
        }
    }
}

pub(crate) fn config_err(line: usize, msg: impl Into<String>) -> CliError {
    CliError::Config { line, msg: msg.into() }
}
