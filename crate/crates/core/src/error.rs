use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid net: {0}")]
    InvalidNet(String),

    #[error("transition `{0}` is not enabled")]
    NotEnabled(String),

    #[error("unknown transition `{0}`")]
    UnknownTransition(String),

    #[error("play-out of trace {trace} failed after {attempts} attempts (no admissible transition before the final marking)")]
    PlayoutExhausted { trace: usize, attempts: usize },

    #[error("variant enumeration exceeded its budget of {0} firings")]
    ExplorationBudget(usize),

    #[error("unknown activity label `{0}`")]
    UnknownLabel(String),

    #[error("token index {index} out of range for vocabulary of size {size}")]
    TokenOutOfRange { index: usize, size: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite loss")]
    NonFiniteLoss,

    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("metric undefined: {0} log is empty")]
    EmptyLog(&'static str),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),

    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
