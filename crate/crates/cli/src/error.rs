use respire_core::audio::AudioError;
use respire_core::embedding::EmbeddingError;
use respire_core::harness::HarnessError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or inputs; exit code 1.
    #[error("{0}")]
    Validation(String),
    /// Failure while computing or writing results; exit code 2.
    #[error("{0}")]
    Runtime(String),
    #[error("no input files found in {0}")]
    NoInput(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::NoInput(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Learn(_) | HarnessError::Head(_) | HarnessError::Leakage { .. } => CliError::Runtime(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<EmbeddingError> for CliError {
    fn from(e: EmbeddingError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<AudioError> for CliError {
    fn from(e: AudioError) -> Self {
        CliError::Validation(e.to_string())
    }
}
