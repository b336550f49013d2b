use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{FeatureTable, HarnessError, Manifest, Modality};
use crate::learn::Matrix;
use crate::FeatureKind;

/// Which recordings feed an experiment: cough, breath, or both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModalitySel {
    C,
    B,
    CB,
}

impl ModalitySel {
    pub fn name(self) -> &'static str {
        match self {
            ModalitySel::C => "C",
            ModalitySel::B => "B",
            ModalitySel::CB => "CB",
        }
    }
}

impl std::str::FromStr for ModalitySel {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "C" => Ok(ModalitySel::C),
            "B" => Ok(ModalitySel::B),
            "CB" => Ok(ModalitySel::CB),
            _ => Err(HarnessError::InvalidConfig(format!("modality must be C, B or CB, got {s:?}"))),
        }
    }
}

/// How `CB` is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CombineMode {
    /// One row per pair: cough features followed by breath features.
    #[default]
    Concatenate,
    /// Cough and breath rows as independent samples.
    Union,
}

/// Rows ready for cross-validation.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub ids: Vec<String>,
    pub users: Vec<String>,
    pub labels: Vec<bool>,
    pub x: Matrix,
    pub kind: FeatureKind,
    /// Manifest rows (or pairs) left out for lack of features or a partner.
    pub dropped: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn user_set(&self) -> BTreeSet<String> {
        self.users.iter().cloned().collect()
    }

    /// Same rows with new labels.
    pub fn with_labels(&self, labels: Vec<bool>) -> Self {
        Self { labels, ..self.clone() }
    }
}

fn select(manifest: &Manifest, table: &FeatureTable, keep: impl Fn(Modality) -> bool) -> Result<Dataset, HarnessError> {
    let index = table.index();
    let (mut ids, mut users, mut labels, mut rows) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut dropped = 0;
    for r in manifest.rows.iter().filter(|r| keep(r.modality)) {
        match index.get(r.sample_id.as_str()) {
            Some(&i) => {
                ids.push(r.sample_id.clone());
                users.push(r.user_id.clone());
                labels.push(r.label);
                rows.push(i);
            }
            None => dropped += 1,
        }
    }
    Ok(Dataset {
        ids,
        users,
        labels,
        x: table.values.select_rows(&rows),
        kind: table.kind,
        dropped,
    })
}

/// `CB` rows from a manifest and one feature table holding both modalities.
pub fn combine_modalities(manifest: &Manifest, table: &FeatureTable, mode: CombineMode) -> Result<Dataset, HarnessError> {
    if mode == CombineMode::Union {
        return select(manifest, table, |_| true);
    }
    let pairs = manifest.pairs();
    if pairs.is_empty() {
        return Err(HarnessError::NoPairs);
    }
    let index = table.index();
    let d = table.dim();
    let (mut ids, mut users, mut labels, mut data) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut dropped = manifest.rows.iter().filter(|r| r.pair_id.is_none()).count();
    for (c, b) in pairs {
        match (index.get(c.sample_id.as_str()), index.get(b.sample_id.as_str())) {
            (Some(&i), Some(&j)) => {
                ids.push(c.pair_id.clone().unwrap());
                users.push(c.user_id.clone());
                labels.push(c.label);
                data.extend_from_slice(table.values.row(i));
                data.extend_from_slice(table.values.row(j));
            }
            _ => dropped += 2,
        }
    }
    if ids.is_empty() {
        return Err(HarnessError::NoPairs);
    }
    if dropped > 0 {
        log::info!("CB: {} pairs kept, {dropped} rows without a usable partner dropped", ids.len());
    }
    let x = Matrix::new(ids.len(), 2 * d, data).map_err(|e| HarnessError::DimensionMismatch(e.to_string()))?;
    Ok(Dataset {
        ids,
        users,
        labels,
        x,
        kind: FeatureKind::Concatenated,
        dropped,
    })
}

pub fn build_dataset(manifest: &Manifest, table: &FeatureTable, sel: ModalitySel, mode: CombineMode) -> Result<Dataset, HarnessError> {
    match sel {
        ModalitySel::C => select(manifest, table, |m| m == Modality::Cough),
        ModalitySel::B => select(manifest, table, |m| m == Modality::Breath),
        ModalitySel::CB => combine_modalities(manifest, table, mode),
    }
}
