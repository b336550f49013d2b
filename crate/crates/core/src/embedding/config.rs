use serde::{Deserialize, Serialize};

use super::EmbeddingError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputRepr {
    Linear,
    Mel64,
    Mel128,
    Mel256,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingCorpus {
    Environmental,
    Music,
    Youtube8m,
    Audioset,
}

/// One pre-trained embedding backbone.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BackboneConfig {
    /// Canonical name, e.g. `"L3 E 6144 M128"`.
    pub name: String,
    pub embedding_dim: usize,
    pub input_repr: InputRepr,
    pub training_corpus: TrainingCorpus,
}

impl BackboneConfig {
    /// Whether this is one of the twelve OpenL3 configurations.
    pub fn is_openl3(&self) -> bool {
        self.name.starts_with("L3 ")
    }

    /// Length of the pooled (mean ++ std) vector.
    pub fn pooled_dim(&self) -> usize {
        2 * self.embedding_dim
    }
}

/// Parse and validate a backbone name.
///
/// Accepts `VGGISH`, `YAMNET` (any case) and the twelve `L3 {E|M}
/// {512|6144} {L|M128|M256}` names; spaces, underscores or hyphens may
/// separate the L3 tokens.
pub fn validate_config(name: &str) -> Result<BackboneConfig, EmbeddingError> {
    let unknown = || EmbeddingError::UnknownConfig(name.to_string());
    let tokens: Vec<&str> = name
        .split(|c: char| c.is_whitespace() || c == '_' || c == '-')
        .filter(|t| !t.is_empty())
        .collect();
    match tokens.as_slice() {
        [single] if single.eq_ignore_ascii_case("vggish") => Ok(BackboneConfig {
            name: "VGGISH".into(),
            embedding_dim: 128,
            input_repr: InputRepr::Mel64,
            training_corpus: TrainingCorpus::Youtube8m,
        }),
        [single] if single.eq_ignore_ascii_case("yamnet") => Ok(BackboneConfig {
            name: "YAMNET".into(),
            embedding_dim: 1024,
            input_repr: InputRepr::Mel64,
            training_corpus: TrainingCorpus::Audioset,
        }),
        ["L3", corpus, dim, input] => {
            let training_corpus = match *corpus {
                "E" => TrainingCorpus::Environmental,
                "M" => TrainingCorpus::Music,
                _ => return Err(unknown()),
            };
            let embedding_dim = match *dim {
                "512" => 512,
                "6144" => 6144,
                _ => return Err(unknown()),
            };
            let input_repr = match *input {
                "L" => InputRepr::Linear,
                "M128" => InputRepr::Mel128,
                "M256" => InputRepr::Mel256,
                _ => return Err(unknown()),
            };
            Ok(BackboneConfig {
                name: format!("L3 {corpus} {dim} {input}"),
                embedding_dim,
                input_repr,
                training_corpus,
            })
        }
        _ => Err(unknown()),
    }
}

/// The 14 valid names: VGGISH, YAMNET and the twelve L3 configurations.
pub fn all_backbone_names() -> Vec<String> {
    let mut names = vec!["VGGISH".to_string(), "YAMNET".to_string()];
    for corpus in ["E", "M"] {
        for dim in ["512", "6144"] {
            for input in ["L", "M128", "M256"] {
                names.push(format!("L3 {corpus} {dim} {input}"));
            }
        }
    }
    names
}
