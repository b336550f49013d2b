//! Short-time power spectra and mel filterbanks.

use rustfft::{num_complex::Complex, FftPlanner};

use super::{frame_count, AudioClip, AudioError, FrameSpec};

/// Floor applied before taking the natural log of mel energies.
pub const LOG_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftParams {
    pub fft_size: usize,
    pub hop: usize,
}

impl StftParams {
    pub fn new(fft_size: usize, hop: usize) -> Result<Self, AudioError> {
        if !fft_size.is_power_of_two() || fft_size < 2 {
            return Err(AudioError::InvalidStft(format!(
                "fft_size {fft_size} is not a power of two"
            )));
        }
        if hop == 0 || hop > fft_size {
            return Err(AudioError::InvalidStft(format!(
                "hop {hop} outside 1..={fft_size}"
            )));
        }
        Ok(Self { fft_size, hop })
    }

    /// Number of one-sided frequency bins.
    pub fn n_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }
}

impl Default for StftParams {
    fn default() -> Self {
        Self {
            fft_size: 2048,
            hop: 512,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinKind {
    Linear,
    Mel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MelNorm {
    /// Peak height 1; overlapping filters sum to one.
    None,
    /// Each triangle scaled to unit area in Hz.
    Area,
}

/// Time-frequency image: `values[frame][bin]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrogramImage {
    pub values: Vec<Vec<f64>>,
    pub bin_kind: BinKind,
    pub n_bins: usize,
    /// Whether `values` hold natural-log power.
    pub log: bool,
    pub frame_spec: FrameSpec,
}

impl SpectrogramImage {
    pub fn n_frames(&self) -> usize {
        self.values.len()
    }
}

/// Periodic Hann window of length `n`.
pub fn hann_window(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect()
}

/// `|FFT(hann * frame)|^2` over every full frame; one-sided bins.
pub fn power_spectrogram(samples: &[f64], params: StftParams) -> Result<Vec<Vec<f64>>, AudioError> {
    let n = params.fft_size;
    let count = frame_count(samples.len(), n, params.hop);
    if count == 0 {
        return Err(AudioError::TooShort {
            samples: samples.len(),
            window: n,
        });
    }
    let window = hann_window(n);
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut out = Vec::with_capacity(count);
    for f in 0..count {
        let start = f * params.hop;
        for (i, b) in buf.iter_mut().enumerate() {
            *b = Complex::new(samples[start + i] * window[i], 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        out.push(buf[..params.n_bins()].iter().map(|c| c.norm_sqr()).collect());
    }
    Ok(out)
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters on the HTK mel scale between 0 Hz and Nyquist;
/// `filters[band][bin]` over one-sided FFT bins.
pub fn mel_filterbank(n_mels: usize, fft_size: usize, sample_rate: u32, norm: MelNorm) -> Vec<Vec<f64>> {
    let n_bins = fft_size / 2 + 1;
    let nyquist = sample_rate as f64 / 2.0;
    let top = hz_to_mel(nyquist);
    let edges: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(top * i as f64 / (n_mels + 1) as f64))
        .collect();
    let bin_hz: Vec<f64> = (0..n_bins)
        .map(|k| k as f64 * sample_rate as f64 / fft_size as f64)
        .collect();
    (0..n_mels)
        .map(|m| {
            let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            let scale = match norm {
                MelNorm::None => 1.0,
                MelNorm::Area => 2.0 / (hi - lo),
            };
            bin_hz
                .iter()
                .map(|&f| {
                    let rising = (f - lo) / (mid - lo);
                    let falling = (hi - f) / (hi - mid);
                    scale * rising.min(falling).max(0.0)
                })
                .collect()
        })
        .collect()
}

fn apply_filterbank(power: &[Vec<f64>], bank: &[Vec<f64>]) -> Vec<Vec<f64>> {
    power
        .iter()
        .map(|frame| {
            bank.iter()
                .map(|filter| filter.iter().zip(frame).map(|(w, p)| w * p).sum())
                .collect()
        })
        .collect()
}

/// Linear power spectrogram, or natural-log mel spectrogram with `n_bins` bands.
pub fn spectrogram(
    clip: &AudioClip,
    kind: BinKind,
    n_bins: usize,
    stft: StftParams,
) -> Result<SpectrogramImage, AudioError> {
    let rate = clip.sample_rate() as f64;
    let frame_spec = FrameSpec::new(stft.fft_size as f64 / rate, stft.hop as f64 / rate)?;
    let power = power_spectrogram(clip.samples(), stft)?;
    match kind {
        BinKind::Linear => {
            if n_bins != stft.n_bins() {
                return Err(AudioError::InvalidStft(format!(
                    "linear spectrogram has {} bins, {n_bins} requested",
                    stft.n_bins()
                )));
            }
            Ok(SpectrogramImage {
                values: power,
                bin_kind: kind,
                n_bins,
                log: false,
                frame_spec,
            })
        }
        BinKind::Mel => {
            if n_bins == 0 || n_bins > stft.n_bins() {
                return Err(AudioError::InvalidStft(format!(
                    "{n_bins} mel bands exceed {} FFT bins",
                    stft.n_bins()
                )));
            }
            let bank = mel_filterbank(n_bins, stft.fft_size, clip.sample_rate(), MelNorm::Area);
            if let Some(m) = bank.iter().position(|row| row.iter().all(|&w| w == 0.0)) {
                return Err(AudioError::InvalidStft(format!(
                    "mel band {m} of {n_bins} covers no FFT bin at fft_size {}",
                    stft.fft_size
                )));
            }
            let values = apply_filterbank(&power, &bank)
                .into_iter()
                .map(|row| row.into_iter().map(|v| v.max(LOG_FLOOR).ln()).collect())
                .collect();
            Ok(SpectrogramImage {
                values,
                bin_kind: kind,
                n_bins,
                log: true,
                frame_spec,
            })
        }
    }
}

/// Mel power (not log) per frame; shared with the MFCC path.
pub(crate) fn mel_power(power: &[Vec<f64>], n_mels: usize, fft_size: usize, rate: u32) -> Vec<Vec<f64>> {
    let bank = mel_filterbank(n_mels, fft_size, rate, MelNorm::Area);
    apply_filterbank(power, &bank)
}
