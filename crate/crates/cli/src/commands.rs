use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use respire_core::audio::decode_wav;
use respire_core::embedding::{pool as pool_set, read_embedding_file, validate_config, BackboneConfig, EmbeddingError};
use respire_core::features::{extract_handcrafted, HANDCRAFTED_DIM};
use respire_core::footprint::{backbone_footprint, format_table, reported_head_overhead, FootprintEntry};
use respire_core::harness::{
    build_dataset, load_manifest, nested_cv, nested_cv_head, undersample, Cell, CombineMode, CvOptions, CvOutcome,
    ExperimentReport, FeatureTable, HeadCvOptions, Manifest, ModalitySel, RunInfo,
};
use respire_core::head::HeadSpace;
use respire_core::learn::Algorithm;
use respire_core::FeatureKind;

use crate::args::{Approach, CbMode, EvaluateArgs, FeaturesArgs, FootprintArgs, PoolArgs};
use crate::error::CliError;
use crate::output::write_atomic;

/// Fraction of unreadable recordings tolerated by feature extraction.
const FAILURE_BUDGET: f64 = 0.05;

fn resolve(manifest_path: &Path, entry: &str) -> PathBuf {
    let p = Path::new(entry);
    if p.is_absolute() {
        return p.to_path_buf();
    }
    manifest_path.parent().unwrap_or(Path::new(".")).join(p)
}

fn extract_table(manifest: &Manifest, manifest_path: &Path) -> Result<FeatureTable, CliError> {
    for r in &manifest.rows {
        let p = resolve(manifest_path, &r.path);
        if !p.is_file() {
            return Err(CliError::Validation(format!(
                "manifest row {} ({}): file {} not found",
                r.line,
                r.sample_id,
                p.display()
            )));
        }
    }
    let t = Instant::now();
    let results: Vec<_> = manifest
        .rows
        .par_iter()
        .map(|r| {
            let clip = decode_wav(resolve(manifest_path, &r.path))?;
            Ok::<_, respire_core::audio::AudioError>((r.sample_id.clone(), extract_handcrafted(&clip)?.into_values()))
        })
        .collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut failed = 0;
    for (r, res) in manifest.rows.iter().zip(results) {
        match res {
            Ok(row) => rows.push(row),
            Err(e) => {
                failed += 1;
                log::warn!("row {} ({}) skipped: {e}", r.line, r.sample_id);
            }
        }
    }
    let n = manifest.len();
    if failed as f64 > FAILURE_BUDGET * n as f64 {
        return Err(CliError::Runtime(format!(
            "{failed} of {n} recordings failed, above the {:.0}% budget",
            FAILURE_BUDGET * 100.0
        )));
    }
    if failed > 0 {
        log::warn!("{failed} of {n} recordings failed and were left out");
    }
    log::info!("extracted {} x {HANDCRAFTED_DIM} features in {:.1?}", rows.len(), t.elapsed());
    FeatureTable::from_rows(rows, FeatureKind::Handcrafted).map_err(CliError::from)
}

pub fn features(a: &FeaturesArgs) -> Result<(), CliError> {
    let manifest = load_manifest(&a.manifest)?;
    let table = extract_table(&manifest, &a.manifest)?;
    write_atomic(&a.out, &table.encode())?;
    log::info!("wrote {} rows to {}", table.len(), a.out.display());
    Ok(())
}

/// Pool every `.emb1` file in `dir` (sorted by file name).
fn pool_dir(dir: &Path) -> Result<(FeatureTable, BackboneConfig), CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::Validation(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "emb1"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::NoInput(dir.display().to_string()));
    }
    let sets: Vec<_> = files.par_iter().map(read_embedding_file).collect::<Result<_, _>>()?;
    let config = sets[0].config().clone();
    let mut seen = BTreeSet::new();
    let mut rows = Vec::with_capacity(sets.len());
    for (set, path) in sets.iter().zip(&files) {
        if set.dim() != config.embedding_dim {
            return Err(EmbeddingError::DimensionMismatch(format!(
                "{} has dim {} ({}), {} has dim {} ({})",
                files[0].display(),
                config.embedding_dim,
                config.name,
                path.display(),
                set.dim(),
                set.config().name
            ))
            .into());
        }
        if !seen.insert(set.sample_id().to_string()) {
            return Err(CliError::Validation(format!("sample {} appears in two files", set.sample_id())));
        }
        rows.push((set.sample_id().to_string(), pool_set(set)?.values));
    }
    let table = FeatureTable::from_rows(rows, FeatureKind::PooledEmbedding)?;
    Ok((table, config))
}

pub fn pool(a: &PoolArgs) -> Result<(), CliError> {
    let (table, config) = pool_dir(&a.emb_dir)?;
    write_atomic(&a.out, &table.encode())?;
    log::info!("pooled {} {} files into {} x {}", table.len(), config.name, table.len(), table.dim());
    Ok(())
}

enum Features {
    Handcrafted,
    Embedding(BackboneConfig),
}

impl Features {
    fn parse(s: &str) -> Result<Self, CliError> {
        if s.eq_ignore_ascii_case("handcrafted") {
            return Ok(Features::Handcrafted);
        }
        match s.split_once(':') {
            Some((p, name)) if p.eq_ignore_ascii_case("emb") || p.eq_ignore_ascii_case("embedding") => {
                Ok(Features::Embedding(validate_config(name)?))
            }
            _ => Err(CliError::Validation(format!("--features must be handcrafted or emb:<NAME>, got {s:?}"))),
        }
    }

    fn label(&self) -> String {
        match self {
            Features::Handcrafted => "handcrafted".into(),
            Features::Embedding(c) => format!("emb:{}", c.name),
        }
    }
}

fn parse_algorithms(s: &str) -> Result<Vec<Algorithm>, CliError> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let alg: Algorithm = part.parse().map_err(|e| CliError::Validation(format!("--algorithms: {e}")))?;
        if !out.contains(&alg) {
            out.push(alg);
        }
    }
    if out.is_empty() {
        return Err(CliError::Validation("--algorithms is empty".into()));
    }
    Ok(out)
}

fn load_table(path: &Path, features: &Features) -> Result<FeatureTable, CliError> {
    let table = FeatureTable::read(path)?;
    let (kind, dim) = match features {
        Features::Handcrafted => (FeatureKind::Handcrafted, HANDCRAFTED_DIM),
        Features::Embedding(c) => (FeatureKind::PooledEmbedding, c.pooled_dim()),
    };
    if table.kind != kind || table.dim() != dim {
        return Err(CliError::Validation(format!(
            "{}: table holds {:?} x {}, --features needs {:?} x {dim}",
            path.display(),
            table.kind,
            table.dim(),
            kind
        )));
    }
    Ok(table)
}

fn parse_list<T: std::str::FromStr>(flag: &str, s: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| CliError::Validation(format!("{flag}: cannot parse {p:?}"))))
        .collect()
}

fn head_space(a: &EvaluateArgs) -> Result<HeadSpace, CliError> {
    let layers: Vec<usize> = parse_list("--head-layers", &a.head_layers)?;
    let units: Vec<usize> = parse_list("--head-units", &a.head_units)?;
    let dropout: Vec<f64> = parse_list("--head-dropout", &a.head_dropout)?;
    if layers.contains(&0) || units.contains(&0) || dropout.iter().any(|d| !(0.0..1.0).contains(d)) {
        return Err(CliError::Validation("head layers and units must be positive, dropout in [0, 1)".into()));
    }
    Ok(HeadSpace::grid(&layers, &units, &dropout))
}

pub fn evaluate(a: &EvaluateArgs) -> Result<(), CliError> {
    let seed = a.seed.ok_or_else(|| {
        CliError::Validation("--seed is required: every run must name its seed so results can be re-run".into())
    })?;
    let started = Instant::now();
    let modality: ModalitySel = a.modality.parse()?;
    let features = Features::parse(&a.features)?;
    let algorithms = parse_algorithms(&a.algorithms)?;
    if a.approach == Approach::Ft && matches!(features, Features::Handcrafted) {
        return Err(CliError::Validation("--approach ft needs --features emb:<NAME>".into()));
    }
    respire_core::head::hyperband_schedule(a.hyperband_r, a.hyperband_eta)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    if a.approach == Approach::Ft {
        head_space(a)?;
    }
    if a.trials == 0 {
        return Err(CliError::Validation("--trials must be positive".into()));
    }

    let mut manifest = load_manifest(&a.manifest)?;
    if !a.no_undersample {
        let before = manifest.len();
        manifest = undersample(&manifest, seed)?;
        log::info!("under-sampling kept {} of {before} rows", manifest.len());
    }

    let table = match (&a.table, &features) {
        (Some(p), f) => load_table(p, f)?,
        (None, Features::Handcrafted) => extract_table(&manifest, &a.manifest)?,
        (None, Features::Embedding(cfg)) => {
            let dir = a
                .emb_dir
                .as_ref()
                .ok_or_else(|| CliError::Validation("emb: features need --emb-dir or --table".into()))?;
            let (t, found) = pool_dir(dir)?;
            if found.embedding_dim != cfg.embedding_dim {
                return Err(EmbeddingError::DimensionMismatch(format!(
                    "{} holds {} files, --features names {}",
                    dir.display(),
                    found.name,
                    cfg.name
                ))
                .into());
            }
            t
        }
    };
    if let Features::Embedding(_) = features {
        let index = table.index();
        let missing: Vec<&str> = manifest
            .rows
            .iter()
            .filter(|r| !index.contains_key(r.sample_id.as_str()))
            .map(|r| r.sample_id.as_str())
            .collect();
        if let Some(first) = missing.first() {
            return Err(CliError::Validation(format!(
                "{} manifest samples have no embedding (first: {first})",
                missing.len()
            )));
        }
    }

    let cb_mode = match a.cb_mode {
        CbMode::Concatenate => CombineMode::Concatenate,
        CbMode::Union => CombineMode::Union,
    };
    let data = build_dataset(&manifest, &table, modality, cb_mode)?;
    let dataset = a.dataset.clone().unwrap_or_else(|| {
        a.manifest
            .file_stem()
            .map_or("dataset".into(), |s| s.to_string_lossy().into_owned())
    });
    log::info!(
        "{dataset}: {} rows, {} users, {} features",
        data.len(),
        data.user_set().len(),
        data.x.cols()
    );

    let run = RunInfo {
        manifest: a.manifest.display().to_string(),
        modality: modality.name().into(),
        features: features.label(),
        approach: match a.approach {
            Approach::Fe => "feature-extraction".into(),
            Approach::Ft => "fine-tuning".into(),
        },
        seed,
        folds: a.folds,
        trials: a.trials,
        hyperband_r: a.hyperband_r,
        hyperband_eta: a.hyperband_eta,
        undersampled: !a.no_undersample,
    };
    let mut report = ExperimentReport::new(run);
    if let Features::Embedding(cfg) = &features {
        report.footprint.push(backbone_footprint(&cfg.name)?);
    }
    let cv = CvOptions {
        k: a.folds,
        seed,
        trials: a.trials,
    };
    let kind = features.label();
    let add = |name: &str, outcome: CvOutcome, report: &mut ExperimentReport| {
        let biggest = outcome.folds.iter().max_by_key(|f| f.model_bytes).expect("at least one fold");
        report.footprint.push(FootprintEntry {
            measured_bytes: Some(biggest.model_bytes as u64),
            ..FootprintEntry::estimate(format!("{kind}/{name}"), biggest.model_parameters as u64)
        });
        report.add_cell(Cell::new(&dataset, modality.name(), &kind, name, seed, &data, outcome));
    };
    match a.approach {
        Approach::Fe => {
            for alg in algorithms {
                let t = Instant::now();
                let outcome = nested_cv(&data, alg, &cv)?;
                log::info!("{alg}: mean PR-AUC {:.4} in {:.1?}", outcome.mean_pr_auc, t.elapsed());
                add(alg.name(), outcome, &mut report);
            }
        }
        Approach::Ft => {
            let t = Instant::now();
            let opts = HeadCvOptions {
                cv,
                space: head_space(a)?,
                r_max: a.hyperband_r,
                eta: a.hyperband_eta,
            };
            let outcome = nested_cv_head(&data, &opts)?;
            if let Features::Embedding(cfg) = &features {
                report.footprint.push(reported_head_overhead(&cfg.name)?);
            }
            log::info!("MLP: mean PR-AUC {:.4} in {:.1?}", outcome.mean_pr_auc, t.elapsed());
            add("MLP", outcome, &mut report);
        }
    }

    write_atomic(&a.out.join("report.json"), report.to_json().as_bytes())?;
    write_atomic(&a.out.join("summary.txt"), report.summary().as_bytes())?;
    write_atomic(&a.out.join("hyperparams.log"), report.hyperparams_log().as_bytes())?;
    print!("{}", report.summary());
    log::info!("wrote {} in {:.1?}", a.out.display(), started.elapsed());
    Ok(())
}

pub fn footprint(a: &FootprintArgs) -> Result<(), CliError> {
    let mut entries: Vec<FootprintEntry> = Vec::new();
    for name in &a.backbone {
        entries.push(backbone_footprint(name)?);
    }
    for path in &a.reports {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let doc: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        if doc.get("schema").and_then(|s| s.as_str()) != Some(respire_core::harness::REPORT_SCHEMA) {
            return Err(CliError::Validation(format!("{} is not a report/1 document", path.display())));
        }
        let list: Vec<FootprintEntry> = serde_json::from_value(doc["footprint"].clone())
            .map_err(|e| CliError::Validation(format!("{}: footprint section: {e}", path.display())))?;
        entries.extend(list);
    }
    if entries.is_empty() {
        return Err(CliError::Validation("give report files or --backbone names".into()));
    }
    let mut seen = BTreeSet::new();
    entries.retain(|e| seen.insert(e.component.clone()));
    let table = format_table(&entries);
    if let Some(out) = &a.out {
        write_atomic(out, table.as_bytes())?;
    }
    print!("{table}");
    Ok(())
}
