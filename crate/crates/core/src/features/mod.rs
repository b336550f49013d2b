//! Hand-crafted acoustic feature vector (477 values).
//!
//! Layout: `[duration, onsets, tempo, period]` followed by the eleven
//! [`STAT_NAMES`] statistics of each of 43 frame series in the order
//! rms energy, spectral centroid, 85% roll-off, zero-crossing rate,
//! MFCC 0..13, delta-MFCC 0..13, delta-delta-MFCC 0..13.
//! 4 + 43 * 11 = 477.

mod scalar;
mod series;
mod stats;

pub use scalar::{dominant_frequency, estimate_tempo, onset_envelope, pick_onsets, scalar_features, ScalarFeatures};
pub use series::{delta, frame_series, frame_series_with, FrameSeries};
pub use stats::{quantile_sorted, series_stats, SeriesStats, STAT_NAMES};

use crate::audio::{resample, AudioClip, AudioError, StftParams};

/// Number of MFCC coefficients kept.
pub const N_MFCC: usize = 13;
/// Mel bands feeding the MFCC DCT.
pub const MFCC_BANDS: usize = 128;
/// Rate the hand-crafted path resamples to.
pub const HANDCRAFTED_RATE: u32 = 22_050;
pub const N_SCALAR: usize = 4;
pub const N_SERIES: usize = 4 + 3 * N_MFCC;
pub const HANDCRAFTED_DIM: usize = N_SCALAR + N_SERIES * STAT_NAMES.len();

const SCALAR_NAMES: [&str; N_SCALAR] = ["duration", "onsets", "tempo", "period"];

/// Fixed-length hand-crafted feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct HandcraftedVector {
    values: Vec<f64>,
}

impl HandcraftedVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value by layout name, e.g. `"zcr.mean"` or `"d2_mfcc_12.kurtosis"`.
    pub fn get(&self, name: &str) -> Option<f64> {
        layout().iter().position(|n| n == name).map(|i| self.values[i])
    }
}

fn series_names() -> Vec<String> {
    let mut names: Vec<String> = ["rms", "centroid", "rolloff", "zcr"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for prefix in ["mfcc", "d_mfcc", "d2_mfcc"] {
        names.extend((0..N_MFCC).map(|c| format!("{prefix}_{c}")));
    }
    names
}

/// Names of all 477 entries in vector order.
pub fn layout() -> Vec<String> {
    let mut out: Vec<String> = SCALAR_NAMES.iter().map(|s| s.to_string()).collect();
    for series in series_names() {
        out.extend(STAT_NAMES.iter().map(|stat| format!("{series}.{stat}")));
    }
    debug_assert_eq!(out.len(), HANDCRAFTED_DIM);
    out
}

/// Extract the hand-crafted vector. The clip is resampled to 22050 Hz and
/// zero-padded to one STFT frame when shorter; duration is measured on the
/// original clip.
pub fn extract_handcrafted(clip: &AudioClip) -> Result<HandcraftedVector, AudioError> {
    let duration = clip.duration_seconds();
    let resampled = resample(clip, HANDCRAFTED_RATE)?;
    let padded = resampled.zero_padded(StftParams::default().fft_size);

    let scalar = scalar_features(&padded)?;
    let series = frame_series(&padded)?;

    let mut values = Vec::with_capacity(HANDCRAFTED_DIM);
    values.extend([duration, scalar.onsets, scalar.tempo, scalar.period]);
    for s in series.ordered() {
        values.extend(series_stats(s).to_array());
    }
    debug_assert_eq!(values.len(), HANDCRAFTED_DIM);
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(AudioError::CorruptFile {
            source_id: clip.source_id().to_string(),
            reason: format!("non-finite feature {}", layout()[i]),
        });
    }
    Ok(HandcraftedVector { values })
}
