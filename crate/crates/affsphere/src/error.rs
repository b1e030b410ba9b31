use std::path::PathBuf;

use thiserror::Error;

/// Exit code for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit code when a numerical stage did not converge or failed a check.
pub const EXIT_NONCONVERGENCE: i32 = 1;
/// Exit code for unreadable or invalid input.
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },

    #[error("invalid config field `{field}`: {message}")]
    Field { field: String, message: String },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("invalid input: {0}")]
    Input(affsphere_core::Error),

    #[error("numerical failure: {0}")]
    Numerical(affsphere_core::Error),

    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl AppError {
    pub fn field(field: impl Into<String>, message: impl Into<String>) -> AppError {
        AppError::Field { field: field.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> AppError {
        AppError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Numerical(_) => EXIT_NONCONVERGENCE,
            _ => EXIT_INPUT,
        }
    }
}

/// Sorts core errors into bad input and numerical trouble.
impl From<affsphere_core::Error> for AppError {
    fn from(e: affsphere_core::Error) -> Self {
        use affsphere_core::Error as E;
        match e {
            E::Domain(_)
            | E::Precondition(_)
            | E::WrongOrder { .. }
            | E::UndefinedOrder
            | E::Frame(_)
            | E::Classification(_)
            | E::Setup(_) => AppError::Input(e),
            _ => AppError::Numerical(e),
        }
    }
}

pub type Result<T> = std::result::Result<T, AppError>;
