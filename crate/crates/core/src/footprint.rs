//! Parameter counts and byte sizes for backbones, heads and shallow models.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::blob::Blob;
use crate::embedding::{validate_config, EmbeddingError};
use crate::head::HeadConfig;

/// Bytes per parameter for estimates (binary32).
pub const BYTES_PER_PARAM: u64 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FootprintEntry {
    pub component: String,
    pub parameter_count: u64,
    /// Always `4 * parameter_count`.
    pub estimated_bytes: u64,
    /// Serialized blob length, when a model object was measured.
    pub measured_bytes: Option<u64>,
    /// Published size of a pre-trained backbone, for comparison.
    pub reported_bytes: Option<u64>,
}

impl FootprintEntry {
    pub fn estimate(component: impl Into<String>, parameter_count: u64) -> Self {
        Self {
            component: component.into(),
            parameter_count,
            estimated_bytes: BYTES_PER_PARAM * parameter_count,
            measured_bytes: None,
            reported_bytes: None,
        }
    }
}

/// `in*u + u + (L-1)(u^2 + u) + 2u + 2`.
pub fn head_param_count(config: &HeadConfig) -> u64 {
    let (d, u, l) = (config.input_dim as u64, config.hidden_units as u64, config.hidden_layers as u64);
    d * u + u + (l - 1) * (u * u + u) + 2 * u + 2
}

const MB: u64 = 1_000_000;

/// Published parameter counts and sizes of the three backbone families.
/// Any valid OpenL3 configuration name maps to the OpenL3 entry.
pub fn backbone_footprint(name: &str) -> Result<FootprintEntry, EmbeddingError> {
    let family = if name.trim().eq_ignore_ascii_case("openl3") {
        "OPENL3"
    } else {
        let cfg = validate_config(name)?;
        if cfg.is_openl3() {
            "OPENL3"
        } else {
            match cfg.name.as_str() {
                "VGGISH" => "VGGISH",
                _ => "YAMNET",
            }
        }
    };
    let (params, reported) = match family {
        "YAMNET" => (3_700_000, 16 * MB),
        "OPENL3" => (4_700_000, 18 * MB),
        _ => (62_000_000, 288 * MB),
    };
    Ok(FootprintEntry {
        reported_bytes: Some(reported),
        ..FootprintEntry::estimate(family, params)
    })
}

/// Published fine-tuning head overhead for a backbone: parameters and
/// bytes as reported, which do not agree at 4 bytes per parameter. Shown
/// next to computed head sizes without reconciliation.
pub fn reported_head_overhead(name: &str) -> Result<FootprintEntry, EmbeddingError> {
    let cfg = validate_config(name)?;
    let (component, params, bytes) = match (cfg.name.as_str(), cfg.embedding_dim) {
        ("YAMNET", _) => ("YAMNET head", 5_800_000, 33_700_000),
        ("VGGISH", _) => ("VGGISH head", 5_300_000, 7_370_000),
        (_, 512) => ("OPENL3-512 head", 5_600_000, 21_800_000),
        _ => ("OPENL3-6144 head", 14_800_000, 56_730_000),
    };
    Ok(FootprintEntry {
        reported_bytes: Some(bytes),
        ..FootprintEntry::estimate(component, params)
    })
}

/// Entry for a serialized model: parameters are the stored weight scalars
/// (an MLP's leading layer-dims array is structure, not weights).
pub fn measure_serialized(component: impl Into<String>, blob: &Blob) -> FootprintEntry {
    let skip = usize::from(blob.tag == *b"MLP\0" && !blob.arrays.is_empty());
    let params: usize = blob.arrays.iter().skip(skip).map(Vec::len).sum();
    FootprintEntry {
        measured_bytes: Some(blob.encoded_len() as u64),
        ..FootprintEntry::estimate(component, params as u64)
    }
}

fn mb(bytes: u64) -> String {
    format!("{:.2} MB", bytes as f64 / MB as f64)
}

/// Fixed-width text table, one line per entry.
pub fn format_table(entries: &[FootprintEntry]) -> String {
    let mut out = String::new();
    let dash = || "-".to_string();
    writeln!(out, "{:<28} {:>12} {:>12} {:>12} {:>12}", "component", "params", "estimated", "measured", "reported").unwrap();
    for e in entries {
        writeln!(
            out,
            "{:<28} {:>12} {:>12} {:>12} {:>12}",
            e.component,
            e.parameter_count,
            mb(e.estimated_bytes),
            e.measured_bytes.map_or_else(dash, mb),
            e.reported_bytes.map_or_else(dash, mb)
        )
        .unwrap();
    }
    out
}
