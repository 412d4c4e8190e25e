use std::path::PathBuf;

use thiserror::Error;

use crate::linsolve::SolveStatus;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("cell index ({i}, {j}) out of range for {nx}x{ny} grid")]
    IndexOutOfRange { i: usize, j: usize, nx: usize, ny: usize },
    #[error("field has {got} values, grid needs {expected}")]
    FieldSize { expected: usize, got: usize },
    #[error("negative density: {0}")]
    NegativeDensity(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("wrong model variant: {0}")]
    WrongVariant(String),
    #[error("species `{0}` has no diffusion term")]
    NonDiffusingSpecies(&'static str),
    #[error("linear solve failed ({status:?}) after {iterations} iterations, residual {residual:.3e}")]
    SolverFailure {
        status: SolveStatus,
        iterations: usize,
        residual: f64,
    },
    #[error("non-finite value in field `{field}` after step {step}")]
    NonFinite { field: &'static str, step: usize },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line driver.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Io { .. } | Error::Json(_) => 4,
            Error::SolverFailure { .. } | Error::NonFinite { .. } => 3,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
