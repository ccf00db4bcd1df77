//! Scenario loading, experiment pipelines, and deterministic report
//! emission around `limitlab-core`.

pub mod emit;
pub mod pipelines;
pub mod scenario;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("scenario error: {0}")]
    Scenario(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn scenario(msg: String) -> Self {
        CliError::Scenario(msg)
    }
    pub fn invariant(msg: String) -> Self {
        CliError::Invariant(msg)
    }
    pub fn io(msg: String) -> Self {
        CliError::Io(msg)
    }
}
