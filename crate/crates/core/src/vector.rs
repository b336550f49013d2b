use serde::{Deserialize, Serialize};

/// Where a feature vector came from. The numeric tag is written to
/// FeatureTable headers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Handcrafted,
    PooledEmbedding,
    Concatenated,
}

impl FeatureKind {
    pub fn tag(self) -> u32 {
        match self {
            FeatureKind::Handcrafted => 0,
            FeatureKind::PooledEmbedding => 1,
            FeatureKind::Concatenated => 2,
        }
    }

    pub fn from_tag(tag: u32) -> Option<Self> {
        match tag {
            0 => Some(FeatureKind::Handcrafted),
            1 => Some(FeatureKind::PooledEmbedding),
            2 => Some(FeatureKind::Concatenated),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub kind: FeatureKind,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>, kind: FeatureKind) -> Self {
        Self { values, kind }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `self ++ other`, tagged as concatenated.
    pub fn concat(&self, other: &FeatureVector) -> FeatureVector {
        let mut values = Vec::with_capacity(self.len() + other.len());
        values.extend_from_slice(&self.values);
        values.extend_from_slice(&other.values);
        FeatureVector::new(values, FeatureKind::Concatenated)
    }
}
