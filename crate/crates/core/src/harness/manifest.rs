use std::collections::{BTreeMap, HashMap};
use std::io::Read;
use std::path::Path;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::rng::{label, rng_for};

pub const MANIFEST_HEADER: [&str; 6] = ["sample_id", "user_id", "modality", "label", "path", "pair_id"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Cough,
    Breath,
}

impl Modality {
    pub fn name(self) -> &'static str {
        match self {
            Modality::Cough => "cough",
            Modality::Breath => "breath",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRow {
    pub sample_id: String,
    pub user_id: String,
    pub modality: Modality,
    /// `true` for positive.
    pub label: bool,
    pub path: String,
    pub pair_id: Option<String>,
    /// Line in the source file (header is line 1).
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub rows: Vec<ManifestRow>,
}

impl Manifest {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `(positive, negative)` counts for one modality.
    pub fn counts(&self, modality: Modality) -> (usize, usize) {
        self.rows
            .iter()
            .filter(|r| r.modality == modality)
            .fold((0, 0), |(p, n), r| if r.label { (p + 1, n) } else { (p, n + 1) })
    }

    /// Check id uniqueness, path uniqueness and pair structure.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let mut ids: HashMap<&str, usize> = HashMap::new();
        let mut paths: HashMap<&str, usize> = HashMap::new();
        for r in &self.rows {
            if let Some(&first) = ids.get(r.sample_id.as_str()) {
                return Err(HarnessError::DuplicateSampleId {
                    sample_id: r.sample_id.clone(),
                    first_row: first,
                    second_row: r.line,
                });
            }
            ids.insert(&r.sample_id, r.line);
            if let Some(&first) = paths.get(r.path.as_str()) {
                return Err(HarnessError::MalformedRow {
                    row: r.line,
                    reason: format!("path {:?} already used on row {first}", r.path),
                });
            }
            paths.insert(&r.path, r.line);
        }
        for (pair, members) in self.pairs_raw() {
            let ok = match members.as_slice() {
                [a, b] => a.modality != b.modality && a.user_id == b.user_id && a.label == b.label,
                _ => false,
            };
            if !ok {
                return Err(HarnessError::DanglingPair {
                    pair_id: pair.to_string(),
                    rows: members.iter().map(|r| r.line).collect(),
                });
            }
        }
        Ok(())
    }

    fn pairs_raw(&self) -> BTreeMap<&str, Vec<&ManifestRow>> {
        let mut m: BTreeMap<&str, Vec<&ManifestRow>> = BTreeMap::new();
        for r in &self.rows {
            if let Some(p) = &r.pair_id {
                m.entry(p.as_str()).or_default().push(r);
            }
        }
        m
    }

    /// Complete `(cough, breath)` pairs ordered by pair id.
    pub fn pairs(&self) -> Vec<(&ManifestRow, &ManifestRow)> {
        self.pairs_raw()
            .into_values()
            .filter_map(|v| match v.as_slice() {
                [a, b] if a.modality == Modality::Cough && b.modality == Modality::Breath => Some((*a, *b)),
                [a, b] if a.modality == Modality::Breath && b.modality == Modality::Cough => Some((*b, *a)),
                _ => None,
            })
            .collect()
    }
}

fn parse_modality(s: &str) -> Option<Modality> {
    match s.trim().to_ascii_lowercase().as_str() {
        "cough" => Some(Modality::Cough),
        "breath" | "breathing" => Some(Modality::Breath),
        _ => None,
    }
}

fn parse_label(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "positive" | "pos" | "1" => Some(true),
        "negative" | "neg" | "0" => Some(false),
        _ => None,
    }
}

/// Parse manifest CSV text from any reader.
pub fn parse_manifest<R: Read>(reader: R) -> Result<Manifest, HarnessError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| HarnessError::MalformedRow { row: 1, reason: e.to_string() })?
        .clone();
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != MANIFEST_HEADER {
        return Err(HarnessError::MalformedRow {
            row: 1,
            reason: format!("header must be {}, found {}", MANIFEST_HEADER.join(","), names.join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| HarnessError::MalformedRow {
            row: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(rows.len() + 2, |p| p.line() as usize);
        let bad = |reason: String| HarnessError::MalformedRow { row: line, reason };
        if rec.len() != 6 {
            return Err(bad(format!("expected 6 fields, found {}", rec.len())));
        }
        let field = |i: usize| rec[i].trim().to_string();
        let (sample_id, user_id, path) = (field(0), field(1), field(4));
        if sample_id.is_empty() || user_id.is_empty() || path.is_empty() {
            return Err(bad("sample_id, user_id and path must be non-empty".into()));
        }
        let modality = parse_modality(&rec[2]).ok_or_else(|| bad(format!("unknown modality {:?}", &rec[2])))?;
        let label = parse_label(&rec[3]).ok_or_else(|| bad(format!("unknown label {:?}", &rec[3])))?;
        let pair = field(5);
        rows.push(ManifestRow {
            sample_id,
            user_id,
            modality,
            label,
            path,
            pair_id: (!pair.is_empty()).then_some(pair),
            line,
        });
    }
    let m = Manifest { rows };
    m.validate()?;
    Ok(m)
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Manifest, HarnessError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    parse_manifest(std::io::BufReader::new(file))
}

/// Write a manifest back out as CSV.
pub fn manifest_to_csv(m: &Manifest) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(MANIFEST_HEADER).unwrap();
    for r in &m.rows {
        w.write_record([
            r.sample_id.as_str(),
            &r.user_id,
            r.modality.name(),
            if r.label { "positive" } else { "negative" },
            &r.path,
            r.pair_id.as_deref().unwrap_or(""),
        ])
        .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// Random under-sampling of the majority class, separately per modality.
/// Surviving rows keep their input order; a pair id whose partner was
/// dropped is cleared.
pub fn undersample(m: &Manifest, seed: u64) -> Result<Manifest, HarnessError> {
    let mut keep = vec![true; m.rows.len()];
    for modality in [Modality::Cough, Modality::Breath] {
        let idx: Vec<usize> = (0..m.rows.len()).filter(|&i| m.rows[i].modality == modality).collect();
        if idx.is_empty() {
            continue;
        }
        let (pos, neg): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| m.rows[i].label);
        if pos.is_empty() || neg.is_empty() {
            return Err(HarnessError::SingleClass(format!("{} rows", modality.name())));
        }
        let (major, minor) = if pos.len() > neg.len() { (pos, neg) } else { (neg, pos) };
        let mut rng = rng_for(seed, &[label("undersample"), label(modality.name())]);
        let mut chosen = vec![false; major.len()];
        for k in sample(&mut rng, major.len(), minor.len()) {
            chosen[k] = true;
        }
        for (k, &i) in major.iter().enumerate() {
            keep[i] = chosen[k];
        }
    }
    let mut rows: Vec<ManifestRow> = m.rows.iter().zip(&keep).filter(|(_, &k)| k).map(|(r, _)| r.clone()).collect();
    let mut count: HashMap<String, usize> = HashMap::new();
    for r in &rows {
        if let Some(p) = &r.pair_id {
            *count.entry(p.clone()).or_default() += 1;
        }
    }
    for r in &mut rows {
        if r.pair_id.as_ref().is_some_and(|p| count[p] != 2) {
            r.pair_id = None;
        }
    }
    Ok(Manifest { rows })
}
