//! Minimal RIFF/WAVE reader and writer.
//!
//! Reads integer PCM (8/16/24/32 bit) and IEEE float (32/64 bit), plain or
//! WAVE_FORMAT_EXTENSIBLE. Channels are averaged to mono and integer samples
//! are scaled by the type range, so 16-bit 16384 becomes 0.5.

use std::path::Path;

use super::{AudioClip, AudioError};

const FORMAT_PCM: u16 = 1;
const FORMAT_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

#[derive(Debug, Clone, Copy)]
struct Format {
    tag: u16,
    channels: u16,
    sample_rate: u32,
    bits: u16,
}

fn corrupt(id: &str, reason: impl Into<String>) -> AudioError {
    AudioError::CorruptFile {
        source_id: id.to_string(),
        reason: reason.into(),
    }
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

/// Decode a WAV file from disk.
pub fn decode_wav(path: impl AsRef<Path>) -> Result<AudioClip, AudioError> {
    let path = path.as_ref();
    let id = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|e| corrupt(&id, e.to_string()))?;
    decode_wav_bytes(&bytes, &id)
}

/// Decode an in-memory WAV image. `source_id` labels the clip and errors.
pub fn decode_wav_bytes(bytes: &[u8], source_id: &str) -> Result<AudioClip, AudioError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(corrupt(source_id, "missing RIFF/WAVE header"));
    }
    let mut format: Option<Format> = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        let body_end = body_start.saturating_add(size).min(bytes.len());
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(corrupt(source_id, "fmt chunk too short"));
                }
                let mut tag = u16_at(body, 0);
                if tag == FORMAT_EXTENSIBLE {
                    if body.len() < 26 {
                        return Err(corrupt(source_id, "extensible fmt chunk too short"));
                    }
                    // First two bytes of the subformat GUID carry the real tag.
                    tag = u16_at(body, 24);
                }
                format = Some(Format {
                    tag,
                    channels: u16_at(body, 2),
                    sample_rate: u32_at(body, 4),
                    bits: u16_at(body, 14),
                });
            }
            b"data" => {
                data = Some(body);
                if format.is_some() {
                    break;
                }
            }
            _ => {}
        }
        // Chunks are word aligned.
        pos = body_start.saturating_add(size).saturating_add(size & 1);
    }
    let format = format.ok_or_else(|| corrupt(source_id, "no fmt chunk"))?;
    let data = data.ok_or_else(|| corrupt(source_id, "no data chunk"))?;
    if format.channels == 0 {
        return Err(corrupt(source_id, "zero channels"));
    }
    let bytes_per_sample = match (format.tag, format.bits) {
        (FORMAT_PCM, 8 | 16 | 24 | 32) | (FORMAT_FLOAT, 32 | 64) => format.bits as usize / 8,
        (tag, bits) => {
            return Err(corrupt(
                source_id,
                format!("unsupported encoding tag {tag} with {bits} bits"),
            ))
        }
    };
    let channels = format.channels as usize;
    let block = bytes_per_sample * channels;
    let n_frames = data.len() / block;
    if n_frames == 0 {
        return Err(AudioError::EmptyAudio(source_id.to_string()));
    }

    let decode = |s: &[u8]| -> f64 {
        match (format.tag, format.bits) {
            (FORMAT_PCM, 8) => (s[0] as f64 - 128.0) / 128.0,
            (FORMAT_PCM, 16) => i16::from_le_bytes([s[0], s[1]]) as f64 / 32_768.0,
            (FORMAT_PCM, 24) => {
                let v = i32::from_le_bytes([0, s[0], s[1], s[2]]) >> 8;
                v as f64 / 8_388_608.0
            }
            (FORMAT_PCM, 32) => {
                i32::from_le_bytes([s[0], s[1], s[2], s[3]]) as f64 / 2_147_483_648.0
            }
            (FORMAT_FLOAT, 32) => f32::from_le_bytes([s[0], s[1], s[2], s[3]]) as f64,
            _ => f64::from_le_bytes([s[0], s[1], s[2], s[3], s[4], s[5], s[6], s[7]]),
        }
    };

    let mut samples = Vec::with_capacity(n_frames);
    for frame in data.chunks_exact(block) {
        let sum: f64 = frame.chunks_exact(bytes_per_sample).map(decode).sum();
        samples.push(sum / channels as f64);
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(corrupt(source_id, "non-finite float sample"));
    }
    AudioClip::new(samples, format.sample_rate, source_id)
}

fn header(tag: u16, channels: u16, rate: u32, bits: u16, data_len: usize) -> Vec<u8> {
    let block = channels as u32 * bits as u32 / 8;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&tag.to_le_bytes());
    out.extend_from_slice(&channels.to_le_bytes());
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&(rate * block).to_le_bytes());
    out.extend_from_slice(&(block as u16).to_le_bytes());
    out.extend_from_slice(&bits.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    out
}

/// Encode interleaved 16-bit PCM frames.
pub fn encode_wav_pcm16(interleaved: &[i16], channels: u16, rate: u32) -> Vec<u8> {
    let mut out = header(FORMAT_PCM, channels, rate, 16, interleaved.len() * 2);
    for s in interleaved {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}

/// Encode mono 32-bit float samples.
pub fn encode_wav_f32(samples: &[f32], rate: u32) -> Vec<u8> {
    let mut out = header(FORMAT_FLOAT, 1, rate, 32, samples.len() * 4);
    for s in samples {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}
