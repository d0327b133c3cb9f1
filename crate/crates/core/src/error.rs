use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("quaternion is not unit norm (|q| = {0})")]
    NonUnitQuaternion(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown action-space model `{0}`")]
    UnknownModel(String),
    #[error("step called on a finished episode")]
    EpisodeDone,
    #[error("replay buffer is empty")]
    EmptyBuffer,
    #[error("training diverged: {0}")]
    Diverged(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("config hash mismatch: checkpoint {checkpoint}, environment {environment}")]
    ConfigHashMismatch {
        checkpoint: String,
        environment: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),
    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
