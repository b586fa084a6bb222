use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("numerical: {0}")]
    Numerical(String),
    #[error("io: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    /// Wraps a library error with the module it came from.
    pub fn from_core(module: &str, e: ptssh::Error) -> Self {
        let msg = format!("{module}: {e}");
        if e.is_numerical() {
            CliError::Numerical(msg)
        } else {
            CliError::Usage(msg)
        }
    }
}
