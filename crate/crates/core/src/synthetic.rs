//! Synthetic cohorts for tests and demos: band-limited noise recordings
//! whose class is carried by spectral band energy, and matching EMB1
//! embedding files.

use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::audio::{encode_wav_pcm16, AudioClip};
use crate::embedding::{validate_config, write_embedding_file, EmbeddingSet};
use crate::harness::{manifest_to_csv, Manifest, ManifestRow, Modality};
use crate::rng::{label, rng_for};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CohortSpec {
    pub users: usize,
    /// Recordings per modality per user; cough `i` is paired with breath `i`.
    pub clips_per_modality: usize,
    pub seconds: f64,
    pub sample_rate: u32,
    /// Positive users get energy in this band (Hz).
    pub positive_band: (f64, f64),
    pub negative_band: (f64, f64),
    pub seed: u64,
}

impl CohortSpec {
    /// 50 users, 2 cough + 2 breath clips each, 1 s at 22050 Hz.
    pub fn standard(seed: u64) -> Self {
        Self {
            users: 50,
            clips_per_modality: 2,
            seconds: 1.0,
            sample_rate: 22_050,
            positive_band: (2000.0, 4000.0),
            negative_band: (300.0, 800.0),
            seed,
        }
    }
}

/// Sum of `n_tones` random-phase sinusoids drawn uniformly from `band`,
/// under a smooth burst envelope, plus faint broadband noise.
pub fn band_noise(band: (f64, f64), seconds: f64, rate: u32, rng: &mut impl Rng) -> Vec<f64> {
    let n = (seconds * rate as f64).round() as usize;
    let n_tones = 24;
    let tones: Vec<(f64, f64, f64)> = (0..n_tones)
        .map(|_| {
            (
                rng.random_range(band.0..band.1),
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(0.5..1.0),
            )
        })
        .collect();
    let gain = rng.random_range(0.3..0.8) / n_tones as f64;
    let onset = rng.random_range(0.05..0.25) * n as f64;
    let width = rng.random_range(0.15..0.3) * n as f64;
    (0..n)
        .map(|i| {
            let t = i as f64 / rate as f64;
            let env = (-((i as f64 - onset - width / 2.0) / width).powi(2) * 2.0).exp();
            let s: f64 = tones.iter().map(|&(f, p, a)| a * (2.0 * PI * f * t + p).sin()).sum();
            let hiss: f64 = StandardNormal.sample(rng);
            gain * env * s + 0.002 * hiss
        })
        .collect()
}

/// One generated recording.
#[derive(Debug, Clone)]
pub struct SyntheticClip {
    pub row: ManifestRow,
    pub clip: AudioClip,
}

/// Users alternate positive/negative, so the cohort is balanced.
pub fn cohort(spec: &CohortSpec) -> Vec<SyntheticClip> {
    let mut out = Vec::new();
    for u in 0..spec.users {
        let user = format!("user{u:03}");
        let positive = u % 2 == 0;
        let band = if positive { spec.positive_band } else { spec.negative_band };
        for c in 0..spec.clips_per_modality {
            let pair = format!("{user}-p{c}");
            for modality in [Modality::Cough, Modality::Breath] {
                let id = format!("{user}-{}{c}", &modality.name()[..1]);
                let mut rng = rng_for(spec.seed, &[label("synthetic-clip"), label(&id)]);
                let samples = band_noise(band, spec.seconds, spec.sample_rate, &mut rng);
                let clip = AudioClip::new(samples, spec.sample_rate, id.clone()).expect("valid synthetic clip");
                out.push(SyntheticClip {
                    row: ManifestRow {
                        sample_id: id.clone(),
                        user_id: user.clone(),
                        modality,
                        label: positive,
                        path: format!("wav/{id}.wav"),
                        pair_id: Some(pair.clone()),
                        line: out.len() + 2,
                    },
                    clip,
                });
            }
        }
    }
    out
}

fn io(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn to_pcm16(samples: &[f64]) -> Vec<i16> {
    samples.iter().map(|&s| (s.clamp(-1.0, 1.0) * 32767.0).round() as i16).collect()
}

/// Write the cohort as 16-bit WAVs under `dir/wav/` plus `dir/manifest.csv`
/// (paths relative to `dir`). Returns the manifest.
pub fn write_cohort(spec: &CohortSpec, dir: impl AsRef<Path>) -> Result<Manifest> {
    let dir = dir.as_ref();
    let wav_dir = dir.join("wav");
    std::fs::create_dir_all(&wav_dir).map_err(|e| io(&wav_dir, e))?;
    let clips = cohort(spec);
    for c in &clips {
        let path = dir.join(&c.row.path);
        let bytes = encode_wav_pcm16(&to_pcm16(c.clip.samples()), 1, spec.sample_rate);
        std::fs::write(&path, bytes).map_err(|e| io(&path, e))?;
    }
    let manifest = Manifest {
        rows: clips.into_iter().map(|c| c.row).collect(),
    };
    let path = dir.join("manifest.csv");
    std::fs::write(&path, manifest_to_csv(&manifest)).map_err(|e| io(&path, e))?;
    Ok(manifest)
}

/// Random window embeddings for one sample. Positive samples have their
/// first `dim / 8` coordinates shifted by `shift`.
pub fn synthetic_embedding(sample_id: &str, backbone: &str, n_windows: usize, positive: bool, shift: f64, seed: u64) -> Result<EmbeddingSet> {
    let config = validate_config(backbone)?;
    let dim = config.embedding_dim;
    let mut rng = rng_for(seed, &[label("synthetic-emb"), label(sample_id)]);
    let values: Vec<f32> = (0..n_windows * dim)
        .map(|i| {
            let z: f64 = StandardNormal.sample(&mut rng);
            let bump = if positive && i % dim < dim / 8 { shift } else { 0.0 };
            (z + bump) as f32
        })
        .collect();
    Ok(EmbeddingSet::new(sample_id, config, n_windows, values)?)
}

/// One `<sample_id>.emb1` file per manifest row.
pub fn write_embeddings(manifest: &Manifest, backbone: &str, n_windows: usize, shift: f64, seed: u64, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    for r in &manifest.rows {
        let set = synthetic_embedding(&r.sample_id, backbone, n_windows, r.label, shift, seed)?;
        write_embedding_file(&set, dir.join(format!("{}.emb1", r.sample_id)))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{power_spectrogram, StftParams};
    use crate::harness::parse_manifest;

    fn band_share(x: &[f64], rate: u32, lo: f64, hi: f64) -> f64 {
        let p = StftParams::new(2048, 512).unwrap();
        let spec = power_spectrogram(x, p).unwrap();
        let hz = rate as f64 / 2048.0;
        let (mut inside, mut total) = (0.0, 0.0);
        for frame in &spec {
            for (k, v) in frame.iter().enumerate() {
                total += v;
                if (lo..=hi).contains(&(k as f64 * hz)) {
                    inside += v;
                }
            }
        }
        inside / total
    }

    #[test]
    fn energy_sits_in_the_class_band() {
        let spec = CohortSpec {
            users: 2,
            ..CohortSpec::standard(3)
        };
        for c in cohort(&spec) {
            let band = if c.row.label { spec.positive_band } else { spec.negative_band };
            let share = band_share(c.clip.samples(), spec.sample_rate, band.0 - 50.0, band.1 + 50.0);
            assert!(share > 0.9, "{} {share}", c.row.sample_id);
        }
    }

    #[test]
    fn cohort_manifest_is_valid_and_balanced() {
        let clips = cohort(&CohortSpec::standard(1));
        assert_eq!(clips.len(), 200);
        let m = Manifest {
            rows: clips.into_iter().map(|c| c.row).collect(),
        };
        m.validate().unwrap();
        assert_eq!(m.counts(Modality::Cough), (50, 50));
        assert_eq!(m.pairs().len(), 100);
        assert_eq!(parse_manifest(manifest_to_csv(&m).as_bytes()).unwrap(), m);
    }

    #[test]
    fn embeddings_have_the_backbone_width() {
        let e = synthetic_embedding("s", "YAMNET", 3, true, 1.0, 0).unwrap();
        assert_eq!((e.n_windows(), e.dim()), (3, 1024));
        assert_eq!(synthetic_embedding("s", "YAMNET", 3, true, 1.0, 0).unwrap(), e);
    }
}
