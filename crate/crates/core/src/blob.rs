//! Self-describing model blobs.
//!
//! Layout, all little-endian:
//!
//! ```text
//! [4]  tag        e.g. b"LR\0\0", b"SVM\0", b"RF\0\0", b"AB\0\0", b"MLP\0", b"NONE"
//! u32  n_arrays
//! per array:
//!   u32   len
//!   f32 * len
//! ```
//!
//! The byte length of a blob is what the footprint module reports as a
//! model's measured size.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BlobError {
    #[error("blob truncated at byte {0}")]
    Truncated(usize),
    #[error("{0} trailing bytes after last array")]
    Trailing(usize),
    #[error("expected tag {expected:?}, found {found:?}")]
    WrongTag { expected: [u8; 4], found: [u8; 4] },
}

pub const NONE_TAG: [u8; 4] = *b"NONE";

#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    pub tag: [u8; 4],
    pub arrays: Vec<Vec<f32>>,
}

impl Blob {
    pub fn new(tag: [u8; 4]) -> Self {
        Self { tag, arrays: Vec::new() }
    }

    /// Header-only blob for "no model".
    pub fn empty() -> Self {
        Self::new(NONE_TAG)
    }

    pub fn push<I: IntoIterator<Item = f64>>(&mut self, values: I) {
        self.arrays.push(values.into_iter().map(|v| v as f32).collect());
    }

    /// Total number of stored scalars.
    pub fn scalar_count(&self) -> usize {
        self.arrays.iter().map(Vec::len).sum()
    }

    pub fn encoded_len(&self) -> usize {
        8 + self.arrays.iter().map(|a| 4 + 4 * a.len()).sum::<usize>()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&self.tag);
        out.extend_from_slice(&(self.arrays.len() as u32).to_le_bytes());
        for a in &self.arrays {
            out.extend_from_slice(&(a.len() as u32).to_le_bytes());
            for v in a {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, BlobError> {
        let mut pos = 0;
        let mut take = |n: usize| -> Result<&[u8], BlobError> {
            let s = bytes.get(pos..pos + n).ok_or(BlobError::Truncated(pos))?;
            pos += n;
            Ok(s)
        };
        let tag: [u8; 4] = take(4)?.try_into().unwrap();
        let n = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let mut arrays = Vec::with_capacity(n.min(1 << 16));
        for _ in 0..n {
            let len = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
            let raw = take(len.checked_mul(4).ok_or(BlobError::Truncated(bytes.len()))?)?;
            arrays.push(
                raw.chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                    .collect(),
            );
        }
        if pos != bytes.len() {
            return Err(BlobError::Trailing(bytes.len() - pos));
        }
        Ok(Self { tag, arrays })
    }

    pub fn expect_tag(&self, expected: [u8; 4]) -> Result<(), BlobError> {
        if self.tag == expected {
            Ok(())
        } else {
            Err(BlobError::WrongTag { expected, found: self.tag })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_is_header_only() {
        let b = Blob::empty().encode();
        assert_eq!(b, b"NONE\0\0\0\0");
        assert_eq!(Blob::decode(&b).unwrap(), Blob::empty());
    }

    #[test]
    fn rejects_truncation_and_trailing() {
        let mut b = Blob::new(*b"LR\0\0");
        b.push([1.0, 2.0]);
        let bytes = b.encode();
        assert_eq!(bytes.len(), 4 + 4 + 4 + 8);
        assert!(matches!(Blob::decode(&bytes[..bytes.len() - 1]), Err(BlobError::Truncated(_))));
        let mut extra = bytes.clone();
        extra.push(0);
        assert_eq!(Blob::decode(&extra), Err(BlobError::Trailing(1)));
    }

    proptest! {
        #[test]
        fn round_trip(arrays in prop::collection::vec(prop::collection::vec(any::<f32>().prop_filter("finite", |v| v.is_finite()), 0..20), 0..6)) {
            let b = Blob { tag: *b"RF\0\0", arrays };
            let bytes = b.encode();
            prop_assert_eq!(bytes.len(), b.encoded_len());
            prop_assert_eq!(Blob::decode(&bytes).unwrap(), b);
        }
    }
}
