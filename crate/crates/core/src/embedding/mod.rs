//! Pre-computed deep audio embeddings: backbone configurations, the EMB1
//! interchange file and mean/std pooling over windows.

mod config;
mod emb1;
mod pool;

pub use config::{all_backbone_names, validate_config, BackboneConfig, InputRepr, TrainingCorpus};
pub use emb1::{decode_embedding, encode_embedding, read_embedding_file, write_embedding_file, MAGIC, VERSION};
pub use pool::pool;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbeddingError {
    #[error("unknown backbone configuration {0:?}")]
    UnknownConfig(String),
    #[error("bad magic bytes {0:02x?}, expected \"EMB1\"")]
    BadMagic([u8; 4]),
    #[error("unsupported EMB1 version {0}")]
    VersionUnsupported(u32),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("embedding set has no windows")]
    EmptySet,
    #[error("non-finite embedding value at window {window}, dim {dim}")]
    NonFinite { window: usize, dim: usize },
    #[error("invalid utf-8 in {0}")]
    BadText(&'static str),
    #[error("i/o error on {path}: {reason}")]
    Io { path: String, reason: String },
}

/// Window embeddings of one sample, row-major `n_windows x dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    sample_id: String,
    config: BackboneConfig,
    n_windows: usize,
    values: Vec<f32>,
}

impl EmbeddingSet {
    pub fn new(
        sample_id: impl Into<String>,
        config: BackboneConfig,
        n_windows: usize,
        values: Vec<f32>,
    ) -> Result<Self, EmbeddingError> {
        let dim = config.embedding_dim;
        if n_windows == 0 {
            return Err(EmbeddingError::EmptySet);
        }
        if values.len() != n_windows * dim {
            return Err(EmbeddingError::DimensionMismatch(format!(
                "{} values for {n_windows} windows of dim {dim}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(EmbeddingError::NonFinite {
                window: i / dim,
                dim: i % dim,
            });
        }
        Ok(Self {
            sample_id: sample_id.into(),
            config,
            n_windows,
            values,
        })
    }

    /// Build from per-window rows.
    pub fn from_rows(
        sample_id: impl Into<String>,
        config: BackboneConfig,
        rows: &[Vec<f32>],
    ) -> Result<Self, EmbeddingError> {
        let dim = config.embedding_dim;
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(EmbeddingError::DimensionMismatch(format!(
                "row of length {} for dim {dim}",
                r.len()
            )));
        }
        let n = rows.len();
        Self::new(sample_id, config, n, rows.concat())
    }

    pub fn sample_id(&self) -> &str {
        &self.sample_id
    }

    pub fn config(&self) -> &BackboneConfig {
        &self.config
    }

    pub fn n_windows(&self) -> usize {
        self.n_windows
    }

    pub fn dim(&self) -> usize {
        self.config.embedding_dim
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn window(&self, i: usize) -> &[f32] {
        let d = self.dim();
        &self.values[i * d..(i + 1) * d]
    }
}
