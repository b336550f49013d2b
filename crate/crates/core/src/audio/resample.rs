//! Polyphase windowed-sinc resampler (Kaiser window, beta 8.6, 64 zero
//! crossings per side).

use super::{AudioClip, AudioError, MAX_RATE, MIN_RATE};

const KAISER_BETA: f64 = 8.6;
const ZERO_CROSSINGS: f64 = 64.0;
/// Cutoff as a fraction of the lower Nyquist frequency.
const ROLLOFF: f64 = 0.95;
/// Phase tables larger than this are evaluated on the fly.
const MAX_TABLE_PHASES: usize = 4096;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Modified Bessel function of the first kind, order zero.
pub(crate) fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

struct Kernel {
    cutoff: f64,
    half_width: f64,
    i0_beta: f64,
}

impl Kernel {
    fn new(cutoff: f64) -> Self {
        Self {
            cutoff,
            half_width: ZERO_CROSSINGS / cutoff,
            i0_beta: bessel_i0(KAISER_BETA),
        }
    }

    /// Filter response at offset `tau` input samples.
    fn at(&self, tau: f64) -> f64 {
        let r = tau / self.half_width;
        if r.abs() >= 1.0 {
            return 0.0;
        }
        let x = std::f64::consts::PI * self.cutoff * tau;
        let sinc = if x.abs() < 1e-12 { 1.0 } else { x.sin() / x };
        let window = bessel_i0(KAISER_BETA * (1.0 - r * r).sqrt()) / self.i0_beta;
        self.cutoff * sinc * window
    }
}

/// Resample to `target_rate`. Output length is `round(n * target / source)`.
pub fn resample(clip: &AudioClip, target_rate: u32) -> Result<AudioClip, AudioError> {
    if !(MIN_RATE..=MAX_RATE).contains(&target_rate) {
        return Err(AudioError::InvalidRate(target_rate));
    }
    if clip.is_empty() {
        return Err(AudioError::EmptyAudio(clip.source_id().to_string()));
    }
    let source_rate = clip.sample_rate();
    if source_rate == target_rate {
        return Ok(clip.clone());
    }
    let g = gcd(source_rate as u64, target_rate as u64);
    let up = (target_rate as u64 / g) as usize;
    let down = (source_rate as u64 / g) as usize;

    let kernel = Kernel::new(ROLLOFF * (up as f64 / down as f64).min(1.0));
    let taps_each_side = kernel.half_width.ceil() as i64;
    let n_taps = (2 * taps_each_side) as usize;

    // table[p][j]: coefficient for input offset j - taps_each_side + 1 at phase p.
    let table: Option<Vec<f64>> = (up <= MAX_TABLE_PHASES).then(|| {
        let mut t = Vec::with_capacity(up * n_taps);
        for p in 0..up {
            let frac = p as f64 / up as f64;
            for j in 0..n_taps {
                let offset = j as i64 - taps_each_side + 1;
                t.push(kernel.at(frac - offset as f64));
            }
        }
        t
    });

    let x = clip.samples();
    let n_in = x.len() as i64;
    let n_out = ((x.len() as f64 * target_rate as f64 / source_rate as f64).round() as usize).max(1);
    let mut out = Vec::with_capacity(n_out);
    for m in 0..n_out {
        let pos = m as u64 * down as u64;
        let base = (pos / up as u64) as i64;
        let phase = (pos % up as u64) as usize;
        let frac = phase as f64 / up as f64;
        let mut acc = 0.0;
        for j in 0..n_taps {
            let k = base + j as i64 - taps_each_side + 1;
            if k < 0 || k >= n_in {
                continue;
            }
            let c = match &table {
                Some(t) => t[phase * n_taps + j],
                None => kernel.at(frac - (j as i64 - taps_each_side + 1) as f64),
            };
            acc += c * x[k as usize];
        }
        out.push(acc);
    }
    AudioClip::new(out, target_rate, clip.source_id())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustfft::{num_complex::Complex, FftPlanner};
    use std::f64::consts::PI;

    fn sine(freq: f64, rate: u32, n: usize) -> AudioClip {
        let s = (0..n)
            .map(|i| (2.0 * PI * freq * i as f64 / rate as f64).sin())
            .collect();
        AudioClip::new(s, rate, "sine").unwrap()
    }

    fn peak_bin(x: &[f64]) -> usize {
        let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
        (0..=buf.len() / 2)
            .max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm()))
            .unwrap()
    }

    #[test]
    fn identity_at_same_rate() {
        let c = sine(440.0, 16000, 1000);
        assert_eq!(resample(&c, 16000).unwrap(), c);
    }

    #[test]
    fn sine_peak_survives_downsampling() {
        let out = resample(&sine(1000.0, 44100, 44100), 16000).unwrap();
        assert_eq!(out.len(), 16000);
        // 1 s at 16 kHz: bin width 1 Hz.
        let bin = peak_bin(out.samples()) as i64;
        assert!((bin - 1000).abs() <= 1, "peak bin {bin}");
    }

    #[test]
    fn output_length_arithmetic() {
        let c = AudioClip::new(vec![0.1; 11025], 22050, "x").unwrap();
        let out = resample(&c, 16000).unwrap();
        assert!((out.len() as i64 - 8000).abs() <= 1);
    }

    #[test]
    fn round_trip_band_limited() {
        // Multi-tone below 4 kHz under a Hann envelope so edges are silent.
        let n = 16000;
        let s: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / 16000.0;
                let env = 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos();
                env * (0.5 * (2.0 * PI * 440.0 * t).sin()
                    + 0.3 * (2.0 * PI * 1870.0 * t).sin()
                    + 0.2 * (2.0 * PI * 3600.0 * t).cos())
            })
            .collect();
        let c = AudioClip::new(s, 16000, "rt").unwrap();
        let up = resample(&c, 22050).unwrap();
        let back = resample(&up, 16000).unwrap();
        assert_eq!(back.len(), c.len());
        let err = c
            .samples()
            .iter()
            .zip(back.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-3, "max error {err}");
    }

    #[test]
    fn on_the_fly_phases_match_table() {
        // 44100 -> 44099 forces more phases than the table limit.
        let c = sine(300.0, 44100, 2000);
        let out = resample(&c, 44099).unwrap();
        let mid = 1000;
        let t = mid as f64 * 44100.0 / 44099.0 / 44100.0;
        assert!((out.samples()[mid] - (2.0 * PI * 300.0 * t).sin()).abs() < 1e-3);
    }

    #[test]
    fn bessel_reference_values() {
        assert!((bessel_i0(0.0) - 1.0).abs() < 1e-15);
        assert!((bessel_i0(1.0) - 1.266_065_877_752_008_4).abs() < 1e-14);
        assert!((bessel_i0(8.6) / 750.461_159_563_165_9 - 1.0).abs() < 1e-13);
    }
}
