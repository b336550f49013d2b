use thiserror::Error;

use crate::audio::AudioError;
use crate::embedding::EmbeddingError;
use crate::harness::HarnessError;
use crate::head::HeadError;
use crate::learn::LearnError;

/// Crate-level error wrapping the per-module error types.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Head(#[from] HeadError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
