//! Manifests, class balancing, user-grouped nested cross-validation,
//! PR-AUC and the experiment report.

mod cv;
mod dataset;
mod folds;
mod manifest;
mod metrics;
mod report;
mod table;

pub use cv::{nested_cv, nested_cv_head, Chosen, CvOptions, CvOutcome, FoldResult, HeadCvOptions};
pub use dataset::{build_dataset, combine_modalities, CombineMode, Dataset, ModalitySel};
pub use folds::{user_grouped_folds, FoldPlan, DEFAULT_FOLDS};
pub use manifest::{load_manifest, manifest_to_csv, parse_manifest, undersample, Manifest, ManifestRow, Modality, MANIFEST_HEADER};
pub use metrics::pr_auc;
pub use report::{Cell, ExperimentReport, RunInfo, REPORT_SCHEMA};
pub use table::FeatureTable;

use thiserror::Error;

use crate::head::HeadError;
use crate::learn::LearnError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("manifest row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("sample id {sample_id:?} appears on rows {first_row} and {second_row}")]
    DuplicateSampleId {
        sample_id: String,
        first_row: usize,
        second_row: usize,
    },
    #[error("pair {pair_id:?} is not one cough and one breath from the same user and label (rows {rows:?})")]
    DanglingPair { pair_id: String, rows: Vec<usize> },
    #[error("only one class present in {0}")]
    SingleClass(String),
    #[error("{users} users cannot fill {k} folds")]
    TooFewUsers { users: usize, k: usize },
    #[error("no complete cough/breath pairs")]
    NoPairs,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("bad feature table: {0}")]
    BadTable(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("i/o error on {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("user {user:?} is on both sides of outer fold {fold}")]
    Leakage { fold: usize, user: String },
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Head(#[from] HeadError),
}
