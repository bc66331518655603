use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),

    #[error("cannot parse config: {0}")]
    ConfigParse(#[from] serde_json::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Core(#[from] lticlust::Error),

    #[error("no center met the separation after {attempts} consecutive rejections")]
    InfeasibleSeparation { attempts: usize },

    #[error("nothing to write: no result rows")]
    EmptyRows,

    #[error("one or more validation checks failed")]
    ChecksFailed,
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 for configuration problems, 2 for anything that
    /// fails at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::ConfigParse(_) => 1,
            _ => 2,
        }
    }
}
