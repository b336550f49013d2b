//! PCA and the four shallow classifiers (LR, SVM, RF, AB).
//!
//! Every classifier maps rows to scores in `[0, 1]`; higher means more
//! likely positive. Labels are `bool` with `true` = positive.

mod adaboost;
mod forest;
mod logistic;
mod matrix;
mod model;
mod pca;
mod space;
mod standardize;
mod svm;
mod tree;

use thiserror::Error;

use crate::blob::BlobError;

pub use adaboost::AdaBoost;
pub use forest::RandomForest;
pub use logistic::{LogisticModel, Penalty};
pub use matrix::Matrix;
pub use model::{fit, score, Hyperparams, ShallowModel};
pub use pca::{pca_fit, PcaBasis, PcaModel, PCA_THRESHOLDS};
pub use space::{candidates, enumerate_space, Candidate, ParamValue, SearchSpace, GRID_LIMIT, RANDOM_TRIALS};
pub use standardize::Standardizer;
pub use svm::{Kernel, SvmModel};
pub use tree::{Criterion, Tree};

pub(crate) use matrix::{dot, sigmoid};

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("non-finite feature at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },
    #[error("data has zero total variance")]
    DegenerateData,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("bad model blob: {0}")]
    Blob(#[from] BlobError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum Algorithm {
    #[serde(rename = "LR")]
    Lr,
    #[serde(rename = "SVM")]
    Svm,
    #[serde(rename = "RF")]
    Rf,
    #[serde(rename = "AB")]
    Ab,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Lr, Algorithm::Svm, Algorithm::Rf, Algorithm::Ab];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Lr => "LR",
            Algorithm::Svm => "SVM",
            Algorithm::Rf => "RF",
            Algorithm::Ab => "AB",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = LearnError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "LR" => Ok(Algorithm::Lr),
            "SVM" => Ok(Algorithm::Svm),
            "RF" => Ok(Algorithm::Rf),
            "AB" => Ok(Algorithm::Ab),
            _ => Err(LearnError::InvalidParams(format!("unknown algorithm {s:?}"))),
        }
    }
}

/// Shared precondition for every `fit`.
pub(crate) fn check_training(x: &Matrix, y: &[bool]) -> Result<(), LearnError> {
    if x.rows() != y.len() {
        return Err(LearnError::DimensionMismatch(format!(
            "{} rows but {} labels",
            x.rows(),
            y.len()
        )));
    }
    x.check_finite()?;
    let pos = y.iter().filter(|&&v| v).count();
    if pos == 0 || pos == y.len() {
        return Err(LearnError::SingleClass);
    }
    Ok(())
}

pub(crate) fn check_dim(x: &Matrix, expected: usize) -> Result<(), LearnError> {
    if x.cols() != expected {
        return Err(LearnError::DimensionMismatch(format!(
            "model expects {expected} columns, got {}",
            x.cols()
        )));
    }
    Ok(())
}
