//! Fully-connected classification head over pooled embeddings, and the
//! Hyperband tuner that picks its shape.

mod hyperband;
mod mlp;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blob::BlobError;

pub use hyperband::{hyperband_schedule, hyperband_search, Bracket, HyperbandResult, RungRecord};
pub use mlp::{train, EpochRecord, HeadModel, TrainOptions};

pub const HIDDEN_LAYERS: [usize; 5] = [1, 2, 3, 4, 5];
pub const HIDDEN_UNITS: [usize; 5] = [128, 512, 1024, 2048, 6144];
pub const DROPOUT_RATES: [f64; 5] = [0.0, 0.1, 0.2, 0.3, 0.4];

#[derive(Debug, Error)]
pub enum HeadError {
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid head config: {0}")]
    InvalidConfig(String),
    #[error("invalid Hyperband budget: {0}")]
    InvalidBudget(String),
    #[error("bad model blob: {0}")]
    Blob(#[from] BlobError),
}

/// Architecture knobs tuned by the search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeadShape {
    pub hidden_layers: usize,
    pub hidden_units: usize,
    pub dropout_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeadConfig {
    pub hidden_layers: usize,
    pub hidden_units: usize,
    pub dropout_rate: f64,
    pub input_dim: usize,
    pub seed: u64,
}

impl HeadConfig {
    pub fn new(shape: HeadShape, input_dim: usize, seed: u64) -> Self {
        Self {
            hidden_layers: shape.hidden_layers,
            hidden_units: shape.hidden_units,
            dropout_rate: shape.dropout_rate,
            input_dim,
            seed,
        }
    }

    pub fn shape(&self) -> HeadShape {
        HeadShape {
            hidden_layers: self.hidden_layers,
            hidden_units: self.hidden_units,
            dropout_rate: self.dropout_rate,
        }
    }

    /// Accepts any positive sizes, not only the searched sets, so small
    /// heads can be built for checks.
    pub fn validate(&self) -> Result<(), HeadError> {
        if self.hidden_layers == 0 || self.hidden_units == 0 || self.input_dim == 0 {
            return Err(HeadError::InvalidConfig(format!(
                "layers={} units={} input_dim={}",
                self.hidden_layers, self.hidden_units, self.input_dim
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(HeadError::InvalidConfig(format!("dropout {}", self.dropout_rate)));
        }
        Ok(())
    }
}

/// Finite set of shapes sampled uniformly by Hyperband.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadSpace {
    pub shapes: Vec<HeadShape>,
}

impl HeadSpace {
    pub fn grid(layers: &[usize], units: &[usize], dropout: &[f64]) -> Self {
        let mut shapes = Vec::new();
        for &hidden_layers in layers {
            for &hidden_units in units {
                for &dropout_rate in dropout {
                    shapes.push(HeadShape {
                        hidden_layers,
                        hidden_units,
                        dropout_rate,
                    });
                }
            }
        }
        Self { shapes }
    }

    /// The full layers x units x dropout space (125 shapes).
    pub fn full() -> Self {
        Self::grid(&HIDDEN_LAYERS, &HIDDEN_UNITS, &DROPOUT_RATES)
    }
}
