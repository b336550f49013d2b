//! FeatureTable files.
//!
//! ```text
//! u32 n_rows | u32 dim | u32 kind (0 handcrafted, 1 pooled, 2 concatenated)
//! f32 * n_rows * dim          row-major values
//! n_rows * (u32 len | utf-8)  sample ids, one per row
//! ```
//! All integers and floats little-endian.

use std::collections::HashMap;
use std::path::Path;

use super::HarnessError;
use crate::learn::Matrix;
use crate::FeatureKind;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub ids: Vec<String>,
    pub kind: FeatureKind,
    pub values: Matrix,
}

impl FeatureTable {
    pub fn new(ids: Vec<String>, kind: FeatureKind, values: Matrix) -> Result<Self, HarnessError> {
        if ids.len() != values.rows() {
            return Err(HarnessError::DimensionMismatch(format!(
                "{} ids for {} rows",
                ids.len(),
                values.rows()
            )));
        }
        Ok(Self { ids, kind, values })
    }

    /// Build from `(id, vector)` rows; every vector must have one length.
    pub fn from_rows(rows: Vec<(String, Vec<f64>)>, kind: FeatureKind) -> Result<Self, HarnessError> {
        let (ids, vals): (Vec<String>, Vec<Vec<f64>>) = rows.into_iter().unzip();
        let values = Matrix::from_rows(&vals).map_err(|e| HarnessError::DimensionMismatch(e.to_string()))?;
        Self::new(ids, kind, values)
    }

    pub fn dim(&self) -> usize {
        self.values.cols()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn index(&self) -> HashMap<&str, usize> {
        self.ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 4 * self.values.data().len());
        out.extend_from_slice(&(self.len() as u32).to_le_bytes());
        out.extend_from_slice(&(self.dim() as u32).to_le_bytes());
        out.extend_from_slice(&self.kind.tag().to_le_bytes());
        for &v in self.values.data() {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
        for id in &self.ids {
            out.extend_from_slice(&(id.len() as u32).to_le_bytes());
            out.extend_from_slice(id.as_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, HarnessError> {
        let bad = |m: String| HarnessError::BadTable(m);
        let u32_at = |pos: usize| -> Result<u32, HarnessError> {
            bytes
                .get(pos..pos + 4)
                .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
                .ok_or_else(|| bad(format!("truncated at byte {pos}")))
        };
        let n = u32_at(0)? as usize;
        let dim = u32_at(4)? as usize;
        let kind = FeatureKind::from_tag(u32_at(8)?).ok_or_else(|| bad("unknown kind tag".into()))?;
        let end = n
            .checked_mul(dim)
            .and_then(|v| v.checked_mul(4))
            .and_then(|v| v.checked_add(12))
            .ok_or_else(|| bad("size overflow".into()))?;
        let raw = bytes
            .get(12..end)
            .ok_or_else(|| bad(format!("need {end} bytes of values, file has {}", bytes.len())))?;
        let data: Vec<f64> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        let mut pos = end;
        let mut ids = Vec::with_capacity(n.min(bytes.len()));
        for _ in 0..n {
            let len = u32_at(pos)? as usize;
            pos += 4;
            let s = bytes.get(pos..pos + len).ok_or_else(|| bad(format!("truncated id at byte {pos}")))?;
            ids.push(String::from_utf8(s.to_vec()).map_err(|_| bad(format!("id at byte {pos} is not UTF-8")))?);
            pos += len;
        }
        if pos != bytes.len() {
            return Err(bad(format!("{} trailing bytes", bytes.len() - pos)));
        }
        let values = Matrix::new(n, dim, data).map_err(|e| bad(e.to_string()))?;
        Self::new(ids, kind, values)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| HarnessError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::decode(&bytes)
    }
}
