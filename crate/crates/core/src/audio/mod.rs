//! Audio frontend: WAV decoding, resampling, peak normalization, framing
//! and STFT-based spectrograms.

mod resample;
mod spectrum;
mod wav;

pub use resample::resample;
pub use spectrum::{
    hann_window, hz_to_mel, mel_filterbank, mel_to_hz, power_spectrogram, spectrogram, BinKind,
    MelNorm, SpectrogramImage, StftParams, LOG_FLOOR,
};
pub(crate) use spectrum::mel_power;
pub use wav::{decode_wav, decode_wav_bytes, encode_wav_f32, encode_wav_pcm16};

use thiserror::Error;

/// Lowest accepted sample rate in Hz.
pub const MIN_RATE: u32 = 8_000;
/// Highest accepted sample rate in Hz.
pub const MAX_RATE: u32 = 96_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AudioError {
    #[error("corrupt audio file {source_id}: {reason}")]
    CorruptFile { source_id: String, reason: String },
    #[error("audio {0} contains no samples")]
    EmptyAudio(String),
    #[error("sample rate {0} Hz outside {MIN_RATE}..={MAX_RATE}")]
    InvalidRate(u32),
    #[error("clip of {samples} samples is shorter than one window of {window}")]
    TooShort { samples: usize, window: usize },
    #[error("invalid frame spec: window {window_seconds} s, hop {hop_seconds} s")]
    InvalidFrameSpec {
        window_seconds: f64,
        hop_seconds: f64,
    },
    #[error("invalid STFT parameters: {0}")]
    InvalidStft(String),
}

/// Decoded mono waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate: u32,
    source_id: String,
}

impl AudioClip {
    pub fn new(
        samples: Vec<f64>,
        sample_rate: u32,
        source_id: impl Into<String>,
    ) -> Result<Self, AudioError> {
        let source_id = source_id.into();
        if !(MIN_RATE..=MAX_RATE).contains(&sample_rate) {
            return Err(AudioError::InvalidRate(sample_rate));
        }
        if samples.is_empty() {
            return Err(AudioError::EmptyAudio(source_id));
        }
        Ok(Self {
            samples,
            sample_rate,
            source_id,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Same rate and id, new samples. Callers guarantee non-empty input.
    pub(crate) fn with_samples(&self, samples: Vec<f64>) -> Self {
        debug_assert!(!samples.is_empty());
        Self {
            samples,
            sample_rate: self.sample_rate,
            source_id: self.source_id.clone(),
        }
    }

    /// Zero-pad at the end to at least `min_len` samples.
    pub fn zero_padded(&self, min_len: usize) -> Self {
        if self.samples.len() >= min_len {
            return self.clone();
        }
        let mut samples = self.samples.clone();
        samples.resize(min_len, 0.0);
        self.with_samples(samples)
    }
}

/// Sliding-window geometry in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSpec {
    window_seconds: f64,
    hop_seconds: f64,
}

impl FrameSpec {
    pub fn new(window_seconds: f64, hop_seconds: f64) -> Result<Self, AudioError> {
        let ok = window_seconds.is_finite()
            && hop_seconds.is_finite()
            && hop_seconds > 0.0
            && hop_seconds <= window_seconds;
        if !ok {
            return Err(AudioError::InvalidFrameSpec {
                window_seconds,
                hop_seconds,
            });
        }
        Ok(Self {
            window_seconds,
            hop_seconds,
        })
    }

    /// 0.96 s windows without overlap.
    pub fn vggish() -> Self {
        Self {
            window_seconds: 0.96,
            hop_seconds: 0.96,
        }
    }

    /// 0.96 s windows with a 0.48 s hop.
    pub fn yamnet() -> Self {
        Self {
            window_seconds: 0.96,
            hop_seconds: 0.48,
        }
    }

    pub fn window_seconds(&self) -> f64 {
        self.window_seconds
    }

    pub fn hop_seconds(&self) -> f64 {
        self.hop_seconds
    }

    /// Window and hop lengths in samples at `rate`.
    pub fn to_samples(&self, rate: u32) -> (usize, usize) {
        let w = (self.window_seconds * rate as f64).round().max(1.0) as usize;
        let h = (self.hop_seconds * rate as f64).round().max(1.0) as usize;
        (w, h.min(w))
    }
}

/// Number of full windows of length `window` with stride `hop` over `n` samples.
pub fn frame_count(n: usize, window: usize, hop: usize) -> usize {
    if n < window || window == 0 || hop == 0 {
        0
    } else {
        (n - window) / hop + 1
    }
}

/// Scale so the largest absolute sample is 1. All-zero input is returned unchanged.
pub fn normalize(clip: &AudioClip) -> AudioClip {
    let peak = clip.samples.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    if peak == 0.0 {
        return clip.clone();
    }
    clip.with_samples(clip.samples.iter().map(|&x| x / peak).collect())
}

/// Cut the clip into full windows; a trailing partial window is dropped.
pub fn frame(clip: &AudioClip, spec: &FrameSpec) -> Result<Vec<AudioClip>, AudioError> {
    let (window, hop) = spec.to_samples(clip.sample_rate);
    let count = frame_count(clip.len(), window, hop);
    if count == 0 {
        return Err(AudioError::TooShort {
            samples: clip.len(),
            window,
        });
    }
    Ok((0..count)
        .map(|i| clip.with_samples(clip.samples[i * hop..i * hop + window].to_vec()))
        .collect())
}

/// Like [`frame`], but a clip shorter than one window is zero-padded to
/// exactly one window instead of failing.
pub fn frame_padded(clip: &AudioClip, spec: &FrameSpec) -> Vec<AudioClip> {
    let (window, _) = spec.to_samples(clip.sample_rate);
    let padded = clip.zero_padded(window);
    frame(&padded, spec).expect("padded clip holds at least one window")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn clip(samples: Vec<f64>, rate: u32) -> AudioClip {
        AudioClip::new(samples, rate, "t").unwrap()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&clip(vec![0.5, -0.25], 16000)).samples(), &[1.0, -0.5]);
        assert_eq!(normalize(&clip(vec![0.0; 3], 16000)).samples(), &[0.0; 3]);
        assert_eq!(normalize(&clip(vec![-2.0, 1.0], 16000)).samples(), &[-1.0, 0.5]);
    }

    #[test]
    fn frame_counts_match_examples() {
        let c = clip(vec![0.0; 46080], 16000);
        let w = frame(&c, &FrameSpec::vggish()).unwrap();
        assert_eq!(w.len(), 3);
        assert!(w.iter().all(|x| x.len() == 15360));
        assert_eq!(frame(&c, &FrameSpec::yamnet()).unwrap().len(), 5);

        let short = clip(vec![0.0; 8000], 16000);
        assert!(matches!(
            frame(&short, &FrameSpec::vggish()),
            Err(AudioError::TooShort { .. })
        ));
        let padded = frame_padded(&short, &FrameSpec::vggish());
        assert_eq!(padded.len(), 1);
        assert_eq!(padded[0].len(), 15360);
    }

    #[test]
    fn windows_start_at_multiples_of_hop() {
        let c = clip((0..100).map(|i| i as f64).collect(), 8000);
        let spec = FrameSpec::new(20.0 / 8000.0, 7.0 / 8000.0).unwrap();
        let w = frame(&c, &spec).unwrap();
        for (i, win) in w.iter().enumerate() {
            assert_eq!(win.samples()[0], (i * 7) as f64);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            AudioClip::new(vec![], 16000, "x"),
            Err(AudioError::EmptyAudio(_))
        ));
        assert!(matches!(
            AudioClip::new(vec![0.0], 4000, "x"),
            Err(AudioError::InvalidRate(4000))
        ));
        assert!(FrameSpec::new(0.5, 0.6).is_err());
        assert!(FrameSpec::new(0.5, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(v in proptest::collection::vec(-10.0f64..10.0, 1..64)) {
            let once = normalize(&clip(v, 16000));
            let twice = normalize(&once);
            prop_assert_eq!(once.samples(), twice.samples());
        }

        #[test]
        fn frame_count_formula(window in 1usize..200, hop_frac in 0.01f64..1.0, extra in 0usize..2000) {
            let hop = ((window as f64 * hop_frac).ceil() as usize).clamp(1, window);
            let n = window + extra;
            let c = clip(vec![0.0; n], 8000);
            let spec = FrameSpec::new(window as f64 / 8000.0, hop as f64 / 8000.0).unwrap();
            let (w, h) = spec.to_samples(8000);
            prop_assert_eq!((w, h), (window, hop));
            let frames = frame(&c, &spec).unwrap();
            prop_assert_eq!(frames.len(), (n - window) / hop + 1);
        }
    }
}
