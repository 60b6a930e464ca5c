use std::path::PathBuf;

use volboot_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("{0}")]
    Config(String),

    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T> = std::result::Result<T, AppError>;

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for numerical failures during a run, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(
                CoreError::InversionFailed { .. }
                | CoreError::NonPositiveVariance { .. }
                | CoreError::Degenerate(_)
                | CoreError::ZeroModulus(_),
            ) => 2,
            _ => 1,
        }
    }
}
