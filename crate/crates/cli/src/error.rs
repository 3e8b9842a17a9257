use std::path::PathBuf;

use thiserror::Error;

/// Failures of a command, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Data(String),

    #[error("{0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<gafzeros::Error> for CliError {
    fn from(e: gafzeros::Error) -> Self {
        use gafzeros::Error as E;
        match e {
            E::Domain(_) => CliError::Usage(e.to_string()),
            E::InvalidInput(_) | E::GridMismatch(_) | E::OutsideRoi(_) => CliError::Data(e.to_string()),
            E::EmptyDisk { .. } | E::Quadrature { .. } | E::Calibration(_) => CliError::Numerical(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
