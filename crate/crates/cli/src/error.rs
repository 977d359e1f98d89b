use thiserror::Error;

/// Command failure, bucketed by exit code.
#[derive(Debug, Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Engine(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Data(_) => 2,
            AppError::Engine(_) => 3,
        }
    }

    pub fn data(msg: impl std::fmt::Display) -> Self {
        AppError::Data(msg.to_string())
    }

    pub fn engine(msg: impl std::fmt::Display) -> Self {
        AppError::Engine(msg.to_string())
    }
}

pub type AppResult<T> = Result<T, AppError>;
