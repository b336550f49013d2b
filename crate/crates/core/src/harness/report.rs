use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::{Chosen, CvOutcome, FoldResult};
use crate::footprint::{format_table, FootprintEntry};

pub const REPORT_SCHEMA: &str = "report/1";

/// Inputs that identify a run. Wall-clock times are deliberately absent so
/// the document is byte-reproducible; they go to the log instead.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunInfo {
    pub manifest: String,
    pub modality: String,
    pub features: String,
    pub approach: String,
    pub seed: u64,
    pub folds: usize,
    pub trials: usize,
    pub hyperband_r: usize,
    pub hyperband_eta: usize,
    pub undersampled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub dataset: String,
    pub modality: String,
    pub feature_kind: String,
    pub algorithm: String,
    pub seed: u64,
    pub n_rows: usize,
    pub n_users: usize,
    pub n_positive: usize,
    pub dropped_rows: usize,
    pub mean_pr_auc: f64,
    pub std_pr_auc: f64,
    pub folds: Vec<FoldResult>,
}

impl Cell {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dataset: &str,
        modality: &str,
        feature_kind: &str,
        algorithm: &str,
        seed: u64,
        data: &super::Dataset,
        outcome: CvOutcome,
    ) -> Self {
        let n = outcome.folds.len() as f64;
        let var = outcome.folds.iter().map(|f| (f.pr_auc - outcome.mean_pr_auc).powi(2)).sum::<f64>() / n;
        Self {
            dataset: dataset.into(),
            modality: modality.into(),
            feature_kind: feature_kind.into(),
            algorithm: algorithm.into(),
            seed,
            n_rows: data.len(),
            n_users: data.user_set().len(),
            n_positive: data.labels.iter().filter(|&&l| l).count(),
            dropped_rows: data.dropped,
            mean_pr_auc: outcome.mean_pr_auc,
            std_pr_auc: var.sqrt(),
            folds: outcome.folds,
        }
    }

    fn key(&self) -> (&str, &str, &str, &str) {
        (&self.dataset, &self.modality, &self.feature_kind, &self.algorithm)
    }

    /// Most frequently chosen PCA threshold (smallest on ties).
    pub fn modal_pca(&self) -> Option<f64> {
        let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
        for f in &self.folds {
            if let Chosen::Shallow { pca_threshold, .. } = f.chosen {
                *counts.entry((pca_threshold * 1000.0).round() as u64).or_default() += 1;
            }
        }
        let max = *counts.values().max()?;
        counts.into_iter().find(|(_, c)| *c == max).map(|(k, _)| k as f64 / 1000.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub schema: &'static str,
    pub run: RunInfo,
    pub cells: Vec<Cell>,
    pub footprint: Vec<FootprintEntry>,
}

impl ExperimentReport {
    pub fn new(run: RunInfo) -> Self {
        Self {
            schema: REPORT_SCHEMA,
            run,
            cells: Vec::new(),
            footprint: Vec::new(),
        }
    }

    /// Cells may arrive in any order; they are kept sorted by
    /// (dataset, modality, feature kind, algorithm).
    pub fn add_cell(&mut self, cell: Cell) {
        let pos = self.cells.partition_point(|c| c.key() < cell.key());
        self.cells.insert(pos, cell);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Plain-text table: one row per cell with classifier, PCA threshold
    /// and PR-AUC.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{:<24} {:<4} {:<5} {:>6} {:>16}", "features", "mod", "clf", "PCA", "PR-AUC").unwrap();
        for c in &self.cells {
            let pca = c.modal_pca().map_or("-".to_string(), |p| format!("{p:.2}"));
            writeln!(
                out,
                "{:<24} {:<4} {:<5} {:>6} {:>9.3} ± {:.3}",
                c.feature_kind, c.modality, c.algorithm, pca, c.mean_pr_auc, c.std_pr_auc
            )
            .unwrap();
        }
        if !self.footprint.is_empty() {
            writeln!(out).unwrap();
            out.push_str(&format_table(&self.footprint));
        }
        out
    }

    /// One line per outer fold with every chosen hyperparameter.
    pub fn hyperparams_log(&self) -> String {
        let mut out = String::new();
        for c in &self.cells {
            for f in &c.folds {
                let chosen = serde_json::to_string(&f.chosen).unwrap();
                writeln!(
                    out,
                    "{} {} {} {} fold={} pr_auc={:.6} inner={:.6} chosen={chosen}",
                    c.dataset, c.modality, c.feature_kind, c.algorithm, f.fold, f.pr_auc, f.inner_pr_auc
                )
                .unwrap();
            }
        }
        out
    }
}
