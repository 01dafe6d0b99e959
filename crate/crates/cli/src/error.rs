use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// JSON that does not match the config schema; the message carries the position.
    #[error("{0}")]
    Schema(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{}: {message}", path.display())]
    Config { path: PathBuf, message: String },
    #[error("cannot read {}: {message}", path.display())]
    Read { path: PathBuf, message: String },
    #[error("cannot write {}: {message}", path.display())]
    Write { path: PathBuf, message: String },
    #[error("objective families differ: {first} vs {other}")]
    MismatchedFamilies { first: String, other: String },
    #[error("invalid {var}: {message}")]
    Env { var: &'static str, message: String },
    #[error(transparent)]
    Core(#[from] fedclip_core::Error),
}

impl CliError {
    pub(crate) fn write(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        CliError::Write {
            path: path.into(),
            message: err.to_string(),
        }
    }
}
