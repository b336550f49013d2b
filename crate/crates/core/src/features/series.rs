//! Frame-level descriptor series on the STFT grid.

use crate::audio::{mel_power, power_spectrogram, AudioClip, AudioError, StftParams};

use super::{MFCC_BANDS, N_MFCC};

/// Per-frame descriptor series; every vector has one entry per STFT frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSeries {
    pub rms_energy: Vec<f64>,
    pub spectral_centroid: Vec<f64>,
    pub rolloff_85: Vec<f64>,
    pub zcr: Vec<f64>,
    /// `mfcc[c][frame]`.
    pub mfcc: Vec<Vec<f64>>,
    pub d_mfcc: Vec<Vec<f64>>,
    pub d2_mfcc: Vec<Vec<f64>>,
}

impl FrameSeries {
    pub fn n_frames(&self) -> usize {
        self.rms_energy.len()
    }

    /// Series in vector-layout order: rms, centroid, rolloff, zcr, 13 MFCC,
    /// 13 delta, 13 delta-delta.
    pub fn ordered(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = vec![
            &self.rms_energy,
            &self.spectral_centroid,
            &self.rolloff_85,
            &self.zcr,
        ];
        out.extend(self.mfcc.iter().map(Vec::as_slice));
        out.extend(self.d_mfcc.iter().map(Vec::as_slice));
        out.extend(self.d2_mfcc.iter().map(Vec::as_slice));
        out
    }
}

/// Orthonormal DCT-II, first `n_out` coefficients.
pub(crate) fn dct2_ortho(x: &[f64], n_out: usize) -> Vec<f64> {
    let n = x.len() as f64;
    (0..n_out)
        .map(|k| {
            let s: f64 = x
                .iter()
                .enumerate()
                .map(|(i, &v)| v * (std::f64::consts::PI * k as f64 * (2 * i + 1) as f64 / (2.0 * n)).cos())
                .sum();
            let scale = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            s * scale
        })
        .collect()
}

/// Regression slope over a 9-frame window with edge replication.
pub fn delta(series: &[f64]) -> Vec<f64> {
    const HALF: i64 = 4;
    let denom: f64 = 2.0 * (1..=HALF).map(|n| (n * n) as f64).sum::<f64>();
    let last = series.len() as i64 - 1;
    (0..series.len() as i64)
        .map(|t| {
            let at = |i: i64| series[i.clamp(0, last) as usize];
            (1..=HALF).map(|n| n as f64 * (at(t + n) - at(t - n))).sum::<f64>() / denom
        })
        .collect()
}

fn zero_crossing_rate(frame: &[f64]) -> f64 {
    // Zero counts as positive.
    let crossings = frame
        .windows(2)
        .filter(|w| (w[0] >= 0.0) != (w[1] >= 0.0))
        .count();
    crossings as f64 / frame.len() as f64
}

/// Compute every frame-level series with the default STFT (2048 / 512).
pub fn frame_series(clip: &AudioClip) -> Result<FrameSeries, AudioError> {
    frame_series_with(clip, StftParams::default())
}

pub fn frame_series_with(clip: &AudioClip, stft: StftParams) -> Result<FrameSeries, AudioError> {
    let x = clip.samples();
    let rate = clip.sample_rate();
    let power = power_spectrogram(x, stft)?;
    let n_frames = power.len();
    let bin_hz = rate as f64 / stft.fft_size as f64;

    let mut rms_energy = Vec::with_capacity(n_frames);
    let mut zcr = Vec::with_capacity(n_frames);
    let mut spectral_centroid = Vec::with_capacity(n_frames);
    let mut rolloff_85 = Vec::with_capacity(n_frames);
    for (f, spec) in power.iter().enumerate() {
        let frame = &x[f * stft.hop..f * stft.hop + stft.fft_size];
        rms_energy.push((frame.iter().map(|v| v * v).sum::<f64>() / frame.len() as f64).sqrt());
        zcr.push(zero_crossing_rate(frame));

        let (weighted, total_mag) = spec.iter().enumerate().fold((0.0, 0.0), |(w, t), (k, &p)| {
            let m = p.sqrt();
            (w + k as f64 * bin_hz * m, t + m)
        });
        spectral_centroid.push(if total_mag > 0.0 { weighted / total_mag } else { 0.0 });

        let total: f64 = spec.iter().sum();
        let rolloff = if total > 0.0 {
            let target = 0.85 * total;
            let mut acc = 0.0;
            let mut bin = spec.len() - 1;
            for (k, &p) in spec.iter().enumerate() {
                acc += p;
                if acc >= target {
                    bin = k;
                    break;
                }
            }
            bin as f64 * bin_hz
        } else {
            0.0
        };
        rolloff_85.push(rolloff);
    }

    let mel = mel_power(&power, MFCC_BANDS, stft.fft_size, rate);
    let mut mfcc: Vec<Vec<f64>> = (0..N_MFCC).map(|_| Vec::with_capacity(n_frames)).collect();
    for frame in &mel {
        let log: Vec<f64> = frame.iter().map(|&v| v.max(crate::audio::LOG_FLOOR).ln()).collect();
        for (c, v) in dct2_ortho(&log, N_MFCC).into_iter().enumerate() {
            mfcc[c].push(v);
        }
    }
    let d_mfcc: Vec<Vec<f64>> = mfcc.iter().map(|s| delta(s)).collect();
    let d2_mfcc: Vec<Vec<f64>> = d_mfcc.iter().map(|s| delta(s)).collect();

    Ok(FrameSeries {
        rms_energy,
        spectral_centroid,
        rolloff_85,
        zcr,
        mfcc,
        d_mfcc,
        d2_mfcc,
    })
}
