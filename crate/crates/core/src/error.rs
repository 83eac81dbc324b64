use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient flow: {usable} usable observations, need at least {required}")]
    InsufficientFlow { usable: usize, required: usize },

    #[error("degenerate line geometry (normal matrix condition number {condition:.3e})")]
    DegenerateGeometry { condition: f64 },

    #[error("signature has zero total mass")]
    ZeroMass,

    #[error("transportation solver did not converge after {0} pivots")]
    SolverStalled(usize),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate training set: {0}")]
    DegenerateTraining(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(path: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the numerics rather than by bad inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::InsufficientFlow { .. }
                | Error::DegenerateGeometry { .. }
                | Error::SolverStalled(_)
                | Error::ZeroMass
        )
    }
}
