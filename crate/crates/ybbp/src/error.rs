use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{0}")]
    InsufficientCompatible(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] ybbp_core::Error),
}

pub type AppResult<T> = Result<T, AppError>;

impl AppError {
    /// 2 for configuration problems, 3 when too few paths are compatible.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Format { .. } => 2,
            Self::Core(ybbp_core::Error::InvalidConfig(_) | ybbp_core::Error::InvalidParameter { .. }) => 2,
            Self::Core(ybbp_core::Error::InsufficientCompatible { .. }) => 3,
            Self::InsufficientCompatible(_) => 3,
            Self::Io { .. } | Self::Core(_) => 1,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Self::Format { path: path.into(), message: message.into() }
    }
}
