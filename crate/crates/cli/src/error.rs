use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("data error in {}, line {line}: {message}", path.display())]
    Data { path: PathBuf, line: u64, message: String },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{0}")]
    Model(#[from] viscokit::Error),

    #[error("{failed} of {total} checks exceeded their tolerance")]
    VerifyFailed { failed: usize, total: usize },
}

impl CliError {
    /// 1 for bad input, 2 for numerical failure.
    pub fn exit_code(&self) -> u8 {
        use viscokit::Error as E;
        match self {
            CliError::Config(_) | CliError::Data { .. } | CliError::Io { .. } => 1,
            CliError::VerifyFailed { .. } => 2,
            CliError::Model(e) => match e.root() {
                E::InvalidParameter(_) | E::EmptySet | E::LengthMismatch { .. } | E::Unsupported(_) => 1,
                _ => 2,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
