//! Toolkit for detecting COVID-19 from cough and breath recordings.
//!
//! Three pipelines share one evaluation harness:
//!
//! ```text
//! WAV -> audio -> features (477 hand-crafted values) --------> learn (PCA + LR/SVM/RF/AB)
//! EMB1 window embeddings -> embedding::pool -----------------> learn (PCA + LR/SVM/RF/AB)
//! EMB1 window embeddings -> embedding::pool -----------------> head (MLP, Hyperband)
//! ```
//!
//! [`harness`] owns manifests, class balancing, user-grouped nested
//! cross-validation, PR-AUC and the `report/1` JSON document.
//! [`footprint`] counts parameters and bytes for backbones, heads and
//! shallow models.

pub mod audio;
pub mod blob;
pub mod embedding;
pub mod error;
pub mod features;
pub mod footprint;
pub mod harness;
pub mod head;
pub mod learn;
pub mod rng;
pub mod synthetic;
mod vector;

pub use error::{Error, Result};
pub use vector::{FeatureKind, FeatureVector};
