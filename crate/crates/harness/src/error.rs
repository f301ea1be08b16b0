use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment spec: {0}")]
    Spec(String),

    #[error(transparent)]
    ChainAborted(psd_langevin::Error),

    #[error("{what} = {value} exceeds threshold {threshold}")]
    ThresholdExceeded { what: String, value: f64, threshold: f64 },

    #[error("trace not found: {0}")]
    MissingTrace(PathBuf),

    #[error("malformed trace {path}: {reason}")]
    BadTrace { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Core(psd_langevin::Error),
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_owned(),
            source,
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Spec(_) => 2,
            HarnessError::ChainAborted(_) => 3,
            HarnessError::ThresholdExceeded { .. } => 4,
            _ => 1,
        }
    }
}

impl From<psd_langevin::Error> for HarnessError {
    fn from(e: psd_langevin::Error) -> Self {
        use psd_langevin::Error as E;
        match e {
            E::ChainAborted { .. } => HarnessError::ChainAborted(e),
            E::InvalidConfig(msg) | E::InvalidMetric(msg) => HarnessError::Spec(msg),
            other => HarnessError::Core(other),
        }
    }
}
