//! EMB1 binary layout (little-endian):
//!
//! ```text
//! "EMB1"            4 bytes magic
//! version           u32 (= 1)
//! name_len, name    u32 + UTF-8 backbone name
//! id_len, id        u32 + UTF-8 sample id
//! n_windows         u32
//! dim               u32
//! values            n_windows * dim binary32, row-major
//! ```

use std::path::Path;

use super::{validate_config, EmbeddingError, EmbeddingSet};

pub const MAGIC: [u8; 4] = *b"EMB1";
pub const VERSION: u32 = 1;

pub fn encode_embedding(set: &EmbeddingSet) -> Vec<u8> {
    let name = set.config().name.as_bytes();
    let id = set.sample_id().as_bytes();
    let mut out = Vec::with_capacity(28 + name.len() + id.len() + set.values().len() * 4);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(name.len() as u32).to_le_bytes());
    out.extend_from_slice(name);
    out.extend_from_slice(&(id.len() as u32).to_le_bytes());
    out.extend_from_slice(id);
    out.extend_from_slice(&(set.n_windows() as u32).to_le_bytes());
    out.extend_from_slice(&(set.dim() as u32).to_le_bytes());
    for v in set.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], EmbeddingError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(
            EmbeddingError::TruncatedPayload {
                expected: self.pos.saturating_add(n),
                found: self.bytes.len(),
            },
        )?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, EmbeddingError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn text(&mut self, what: &'static str) -> Result<String, EmbeddingError> {
        let len = self.u32()? as usize;
        let b = self.take(len)?;
        String::from_utf8(b.to_vec()).map_err(|_| EmbeddingError::BadText(what))
    }
}

pub fn decode_embedding(bytes: &[u8]) -> Result<EmbeddingSet, EmbeddingError> {
    if bytes.len() < 4 {
        return Err(EmbeddingError::TruncatedPayload {
            expected: 4,
            found: bytes.len(),
        });
    }
    if bytes[..4] != MAGIC {
        return Err(EmbeddingError::BadMagic([bytes[0], bytes[1], bytes[2], bytes[3]]));
    }
    let mut cur = Cursor { bytes, pos: 4 };
    let version = cur.u32()?;
    if version != VERSION {
        return Err(EmbeddingError::VersionUnsupported(version));
    }
    let name = cur.text("config name")?;
    let sample_id = cur.text("sample id")?;
    let n_windows = cur.u32()? as usize;
    let dim = cur.u32()? as usize;
    let config = validate_config(&name)?;
    if dim != config.embedding_dim {
        return Err(EmbeddingError::DimensionMismatch(format!(
            "header dim {dim}, {} expects {}",
            config.name, config.embedding_dim
        )));
    }
    let payload = n_windows * dim * 4;
    let remaining = bytes.len() - cur.pos;
    if remaining < payload {
        return Err(EmbeddingError::TruncatedPayload {
            expected: payload,
            found: remaining,
        });
    }
    if remaining > payload {
        return Err(EmbeddingError::DimensionMismatch(format!(
            "{remaining} payload bytes for {n_windows} x {dim} values"
        )));
    }
    let values = cur
        .take(payload)?
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    EmbeddingSet::new(sample_id, config, n_windows, values)
}

pub fn write_embedding_file(set: &EmbeddingSet, path: impl AsRef<Path>) -> Result<(), EmbeddingError> {
    let path = path.as_ref();
    std::fs::write(path, encode_embedding(set)).map_err(|e| EmbeddingError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

pub fn read_embedding_file(path: impl AsRef<Path>) -> Result<EmbeddingSet, EmbeddingError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| EmbeddingError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    decode_embedding(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::validate_config;
    use proptest::prelude::*;

    fn set(n: usize, name: &str) -> EmbeddingSet {
        let config = validate_config(name).unwrap();
        let d = config.embedding_dim;
        let values = (0..n * d).map(|i| (i as f32 * 0.37).sin()).collect();
        EmbeddingSet::new("sample-1", config, n, values).unwrap()
    }

    #[test]
    fn exact_byte_layout() {
        let s = set(1, "VGGISH");
        let bytes = encode_embedding(&s);
        assert_eq!(&bytes[..4], &[0x45, 0x4D, 0x42, 0x31]);
        assert_eq!(&bytes[4..8], &1u32.to_le_bytes());
        assert_eq!(&bytes[8..12], &6u32.to_le_bytes());
        assert_eq!(&bytes[12..18], b"VGGISH");
        assert_eq!(&bytes[18..22], &8u32.to_le_bytes());
        assert_eq!(&bytes[22..30], b"sample-1");
        assert_eq!(&bytes[30..34], &1u32.to_le_bytes());
        assert_eq!(&bytes[34..38], &128u32.to_le_bytes());
        assert_eq!(bytes.len(), 38 + 128 * 4);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.emb");
        let s = set(3, "L3 M 512 M128");
        write_embedding_file(&s, &path).unwrap();
        assert_eq!(read_embedding_file(&path).unwrap(), s);
    }

    #[test]
    fn bad_magic() {
        let mut bytes = encode_embedding(&set(1, "VGGISH"));
        bytes[..4].copy_from_slice(b"XXXX");
        assert!(matches!(decode_embedding(&bytes), Err(EmbeddingError::BadMagic(_))));
    }

    #[test]
    fn unsupported_version() {
        let mut bytes = encode_embedding(&set(1, "VGGISH"));
        bytes[4..8].copy_from_slice(&2u32.to_le_bytes());
        assert_eq!(decode_embedding(&bytes), Err(EmbeddingError::VersionUnsupported(2)));
    }

    #[test]
    fn truncated_payload() {
        // Header says three windows, payload holds two.
        let bytes = encode_embedding(&set(3, "VGGISH"));
        let cut = &bytes[..bytes.len() - 128 * 4];
        assert!(matches!(
            decode_embedding(cut),
            Err(EmbeddingError::TruncatedPayload { .. })
        ));
    }

    #[test]
    fn header_dim_must_match_config_and_payload() {
        let mut bytes = encode_embedding(&set(1, "VGGISH"));
        bytes[34..38].copy_from_slice(&64u32.to_le_bytes());
        assert!(matches!(decode_embedding(&bytes), Err(EmbeddingError::DimensionMismatch(_))));

        let mut extra = encode_embedding(&set(1, "VGGISH"));
        extra.extend_from_slice(&[0, 0, 0, 0]);
        assert!(matches!(decode_embedding(&extra), Err(EmbeddingError::DimensionMismatch(_))));
    }

    #[test]
    fn unknown_config_in_header() {
        let mut bytes = encode_embedding(&set(1, "VGGISH"));
        bytes[12..18].copy_from_slice(b"VGGISX");
        assert!(matches!(decode_embedding(&bytes), Err(EmbeddingError::UnknownConfig(_))));
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            n in 1usize..6,
            bits in proptest::collection::vec(any::<u32>(), 6 * 128),
            id in "[a-z0-9_-]{0,12}",
        ) {
            let config = validate_config("VGGISH").unwrap();
            let values: Vec<f32> = bits[..n * 128]
                .iter()
                .map(|&b| {
                    let v = f32::from_bits(b);
                    if v.is_finite() { v } else { 0.0 }
                })
                .collect();
            let s = EmbeddingSet::new(id, config, n, values).unwrap();
            let back = decode_embedding(&encode_embedding(&s)).unwrap();
            let a: Vec<u32> = s.values().iter().map(|v| v.to_bits()).collect();
            let b: Vec<u32> = back.values().iter().map(|v| v.to_bits()).collect();
            prop_assert_eq!(a, b);
            prop_assert_eq!(back.sample_id(), s.sample_id());
        }
    }
}
