//! Whole-clip scalar descriptors: duration, onset count, tempo and
//! dominant frequency.

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::audio::{power_spectrogram, AudioClip, AudioError, StftParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarFeatures {
    /// Seconds.
    pub duration: f64,
    pub onsets: f64,
    /// Beats per minute; 0 when no periodicity is found.
    pub tempo: f64,
    /// Frequency (Hz) of the largest full-signal FFT magnitude.
    pub period: f64,
}

const MIN_BPM: f64 = 30.0;
const MAX_BPM: f64 = 300.0;
/// Local-mean half window for peak picking, seconds.
const ONSET_MEAN_SECONDS: f64 = 0.1;
/// Local-max half window and minimum gap between onsets, frames.
const ONSET_MAX_FRAMES: usize = 3;
const ONSET_DELTA_STD: f64 = 0.3;
/// Gaussian smoothing of the onset envelope before autocorrelation, frames.
const TEMPO_SMOOTH_SIGMA: f64 = 2.0;

/// Half-wave rectified spectral flux of the magnitude spectrogram.
/// The first frame has no predecessor and is assigned zero.
pub fn onset_envelope(power: &[Vec<f64>]) -> Vec<f64> {
    let mut env = Vec::with_capacity(power.len());
    env.push(0.0);
    for pair in power.windows(2) {
        let flux = pair[1]
            .iter()
            .zip(&pair[0])
            .map(|(cur, prev)| (cur.sqrt() - prev.sqrt()).max(0.0))
            .sum();
        env.push(flux);
    }
    env.truncate(power.len());
    env
}

/// Indices of picked onset peaks.
pub fn pick_onsets(env: &[f64], frames_per_second: f64) -> Vec<usize> {
    let n = env.len();
    if n == 0 {
        return Vec::new();
    }
    let mean = env.iter().sum::<f64>() / n as f64;
    let std = (env.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    let mean_half = (ONSET_MEAN_SECONDS * frames_per_second).round().max(1.0) as usize;

    let mut peaks: Vec<usize> = Vec::new();
    for t in 0..n {
        let v = env[t];
        if v <= 0.0 {
            continue;
        }
        let lo = t.saturating_sub(ONSET_MAX_FRAMES);
        let hi = (t + ONSET_MAX_FRAMES).min(n - 1);
        if env[lo..=hi].iter().any(|&u| u > v) {
            continue;
        }
        let mlo = t.saturating_sub(mean_half);
        let mhi = (t + mean_half).min(n - 1);
        let local_mean = env[mlo..=mhi].iter().sum::<f64>() / (mhi - mlo + 1) as f64;
        if v <= local_mean + ONSET_DELTA_STD * std {
            continue;
        }
        if let Some(&last) = peaks.last() {
            if t - last <= ONSET_MAX_FRAMES {
                continue;
            }
        }
        peaks.push(t);
    }
    peaks
}

fn gaussian_smooth(x: &[f64], sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let kernel: Vec<f64> = (-radius..=radius)
        .map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let n = x.len() as i64;
    (0..n)
        .map(|t| {
            (-radius..=radius)
                .filter(|k| (0..n).contains(&(t + k)))
                .map(|k| x[(t + k) as usize] * kernel[(k + radius) as usize])
                .sum()
        })
        .collect()
}

/// Autocorrelation tempo of an onset envelope, restricted to 30-300 BPM.
pub fn estimate_tempo(env: &[f64], frames_per_second: f64) -> f64 {
    let smooth = gaussian_smooth(env, TEMPO_SMOOTH_SIGMA);
    let min_lag = (60.0 * frames_per_second / MAX_BPM).ceil() as usize;
    let max_lag = ((60.0 * frames_per_second / MIN_BPM).floor() as usize).min(smooth.len().saturating_sub(1));
    if min_lag == 0 || min_lag > max_lag {
        return 0.0;
    }
    let ac = |lag: usize| -> f64 { smooth.iter().zip(&smooth[lag..]).map(|(a, b)| a * b).sum() };
    let values: Vec<f64> = (min_lag..=max_lag).map(ac).collect();
    let (best_i, &best) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .expect("non-empty lag range");
    if best <= 0.0 {
        return 0.0;
    }
    let lag = (min_lag + best_i) as f64;
    // Parabolic refinement using neighbouring lags, which may lie outside the window.
    let lag_i = min_lag + best_i;
    let refined = if lag_i >= 1 && lag_i + 1 < smooth.len() {
        let (a, b, c) = (ac(lag_i - 1), best, ac(lag_i + 1));
        let denom = a - 2.0 * b + c;
        if denom < 0.0 {
            lag + (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
        } else {
            lag
        }
    } else {
        lag
    };
    60.0 * frames_per_second / refined
}

/// Frequency of the largest magnitude in the one-sided FFT of the whole clip.
pub fn dominant_frequency(clip: &AudioClip) -> f64 {
    let n = clip.len();
    let mut buf: Vec<Complex<f64>> = clip.samples().iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mut best = (0usize, -1.0f64);
    for (k, c) in buf.iter().enumerate().take(n / 2 + 1) {
        let m = c.norm_sqr();
        if m > best.1 {
            best = (k, m);
        }
    }
    best.0 as f64 * clip.sample_rate() as f64 / n as f64
}

/// Scalar descriptors with the default STFT. Clips shorter than one STFT
/// frame get zero onsets and zero tempo.
pub fn scalar_features(clip: &AudioClip) -> Result<ScalarFeatures, AudioError> {
    if clip.is_empty() {
        return Err(AudioError::EmptyAudio(clip.source_id().to_string()));
    }
    let stft = StftParams::default();
    let fps = clip.sample_rate() as f64 / stft.hop as f64;
    let (onsets, tempo) = match power_spectrogram(clip.samples(), stft) {
        Ok(power) => {
            let env = onset_envelope(&power);
            (pick_onsets(&env, fps).len() as f64, estimate_tempo(&env, fps))
        }
        Err(AudioError::TooShort { .. }) => (0.0, 0.0),
        Err(e) => return Err(e),
    };
    Ok(ScalarFeatures {
        duration: clip.duration_seconds(),
        onsets,
        tempo,
        period: dominant_frequency(clip),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn silence() {
        let clip = AudioClip::new(vec![0.0; 32000], 16000, "z").unwrap();
        let f = scalar_features(&clip).unwrap();
        assert_eq!(f.duration, 2.0);
        assert_eq!(f.onsets, 0.0);
        assert_eq!(f.tempo, 0.0);
    }

    #[test]
    fn sine_period() {
        let rate = 22050;
        let x = (0..rate)
            .map(|i| (2.0 * PI * 440.0 * i as f64 / rate as f64).sin())
            .collect();
        let clip = AudioClip::new(x, rate as u32, "s").unwrap();
        let f = scalar_features(&clip).unwrap();
        // One FFT bin is rate / N = 1 Hz here.
        assert!((f.period - 440.0).abs() <= 1.0);
    }

    #[test]
    fn click_train_tempo_and_onsets() {
        let rate = 22050usize;
        let mut x = vec![0.0; 4 * rate];
        // Two clicks per second, first at 0.25 s.
        for k in 0..8 {
            let at = rate / 4 + k * rate / 2;
            x[at] = 1.0;
        }
        let clip = AudioClip::new(x, rate as u32, "c").unwrap();
        let f = scalar_features(&clip).unwrap();
        assert!((f.tempo - 120.0).abs() <= 5.0, "tempo {}", f.tempo);
        assert!((f.onsets - 8.0).abs() <= 1.0, "onsets {}", f.onsets);
    }

    #[test]
    fn slower_click_train() {
        let rate = 22050usize;
        let mut x = vec![0.0; 6 * rate];
        // 90 BPM.
        let period = rate * 2 / 3;
        let mut at = rate / 5;
        while at < x.len() {
            x[at] = 0.8;
            at += period;
        }
        let clip = AudioClip::new(x, rate as u32, "c").unwrap();
        let f = scalar_features(&clip).unwrap();
        assert!((f.tempo - 90.0).abs() <= 5.0, "tempo {}", f.tempo);
    }
}
