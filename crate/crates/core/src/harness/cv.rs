use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use super::{pr_auc, Dataset, FoldPlan, HarnessError};
use crate::head::{hyperband_search, train, HeadConfig, HeadSpace, TrainOptions};
use crate::learn::{candidates, fit, Algorithm, Candidate, Hyperparams, Matrix, PcaBasis, Standardizer, PCA_THRESHOLDS};
use crate::rng::{derive_seed, label};

#[derive(Debug, Clone, PartialEq)]
pub struct CvOptions {
    pub k: usize,
    pub seed: u64,
    /// Random-search trials for grids above the exhaustive limit.
    pub trials: usize,
}

impl CvOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            k: super::DEFAULT_FOLDS,
            seed,
            trials: crate::learn::RANDOM_TRIALS,
        }
    }
}

/// Chosen configuration of one outer fold.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Chosen {
    Shallow {
        pca_threshold: f64,
        n_components: usize,
        hyperparams: Hyperparams,
    },
    Head {
        hidden_layers: usize,
        hidden_units: usize,
        dropout_rate: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldResult {
    pub fold: usize,
    pub pr_auc: f64,
    /// Mean inner-validation PR-AUC of the chosen configuration.
    pub inner_pr_auc: f64,
    pub chosen: Chosen,
    pub n_train: usize,
    pub n_test: usize,
    pub train_users: usize,
    pub test_users: usize,
    /// Serialized size of the refit model (PCA excluded).
    pub model_bytes: usize,
    pub model_parameters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvOutcome {
    pub folds: Vec<FoldResult>,
    pub mean_pr_auc: f64,
}

fn rows_of(users: &[String], set: &BTreeSet<&str>) -> Vec<usize> {
    (0..users.len()).filter(|&i| set.contains(users[i].as_str())).collect()
}

fn labels_of(y: &[bool], idx: &[usize]) -> Vec<bool> {
    idx.iter().map(|&i| y[i]).collect()
}

/// Outer/inner row indices for a fold, with the leakage guard applied.
fn outer_split(data: &Dataset, plan: &FoldPlan, f: usize) -> Result<(Vec<usize>, Vec<usize>), HarnessError> {
    let test_u = plan.test_users(f);
    let dev_u = plan.dev_users(f);
    if let Some(u) = test_u.intersection(&dev_u).next() {
        return Err(HarnessError::Leakage {
            fold: f,
            user: u.to_string(),
        });
    }
    let dev = rows_of(&data.users, &dev_u);
    let test = rows_of(&data.users, &test_u);
    let dev_users: BTreeSet<&str> = dev.iter().map(|&i| data.users[i].as_str()).collect();
    if let Some(&i) = test.iter().find(|&&i| dev_users.contains(data.users[i].as_str())) {
        return Err(HarnessError::Leakage {
            fold: f,
            user: data.users[i].clone(),
        });
    }
    Ok((dev, test))
}

/// Inner `(train, validation)` positions relative to the dev row list.
fn inner_splits(data: &Dataset, plan: &FoldPlan, f: usize, dev: &[usize]) -> Vec<(Vec<usize>, Vec<usize>)> {
    (0..plan.k)
        .map(|j| {
            let (tr_u, va_u) = plan.inner_split(f, j);
            let pick = |s: &BTreeSet<&str>| -> Vec<usize> {
                (0..dev.len()).filter(|&p| s.contains(data.users[dev[p]].as_str())).collect()
            };
            (pick(&tr_u), pick(&va_u))
        })
        .collect()
}

fn has_both(y: &[bool]) -> bool {
    y.iter().any(|&v| v) && y.iter().any(|&v| !v)
}

/// PCA projections of one inner split at every threshold.
struct Projected {
    train: Vec<Matrix>,
    val: Vec<Matrix>,
    y_train: Vec<bool>,
    y_val: Vec<bool>,
}

fn project(x_tr: &Matrix, x_va: &Matrix) -> Result<(Vec<Matrix>, Vec<Matrix>), HarnessError> {
    let basis = PcaBasis::fit(x_tr)?;
    let mut tr = Vec::new();
    let mut va = Vec::new();
    for &t in &PCA_THRESHOLDS {
        let m = basis.truncate(t);
        tr.push(m.transform(x_tr)?);
        va.push(m.transform(x_va)?);
    }
    Ok((tr, va))
}

fn threshold_index(t: f64) -> usize {
    PCA_THRESHOLDS.iter().position(|&v| v == t).expect("threshold from the fixed set")
}

/// Nested cross-validation of one shallow algorithm: PCA threshold and
/// hyperparameters chosen by mean inner PR-AUC, refit on the whole
/// development set, scored on the held-out users.
pub fn nested_cv(data: &Dataset, algorithm: Algorithm, opts: &CvOptions) -> Result<CvOutcome, HarnessError> {
    let plan = FoldPlan::new(&data.user_set(), opts.k, opts.seed)?;
    let mut folds = Vec::with_capacity(opts.k);
    for f in 0..opts.k {
        let (dev, test) = outer_split(data, &plan, f)?;
        let x_dev = data.x.select_rows(&dev);
        let y_dev = labels_of(&data.labels, &dev);
        let cands: Vec<Candidate> = candidates(algorithm, derive_seed(opts.seed, &[label("candidates"), f as u64]), opts.trials);
        let mut projected = Vec::new();
        for (tr, va) in inner_splits(data, &plan, f, &dev) {
            let (y_tr, y_va) = (labels_of(&y_dev, &tr), labels_of(&y_dev, &va));
            if !has_both(&y_tr) || !has_both(&y_va) {
                log::warn!("fold {f}: inner split with a single class skipped");
                continue;
            }
            let (train, val) = project(&x_dev.select_rows(&tr), &x_dev.select_rows(&va))?;
            projected.push(Projected {
                train,
                val,
                y_train: y_tr,
                y_val: y_va,
            });
        }
        if projected.is_empty() {
            return Err(HarnessError::SingleClass(format!("every inner split of outer fold {f}")));
        }
        let inner: Vec<f64> = cands
            .par_iter()
            .map(|c| -> Result<f64, HarnessError> {
                let t = threshold_index(c.pca_threshold);
                let mut s = 0.0;
                for (j, p) in projected.iter().enumerate() {
                    let seed = derive_seed(opts.seed, &[label("inner-fit"), f as u64, j as u64]);
                    let m = fit(&c.params, &p.train[t], &p.y_train, seed)?;
                    s += pr_auc(&m.score(&p.val[t])?, &p.y_val)?;
                }
                Ok(s / projected.len() as f64)
            })
            .collect::<Result<_, _>>()?;
        let best = (0..cands.len()).fold(0, |b, i| if inner[i] > inner[b] { i } else { b });
        let chosen = &cands[best];
        let pca = PcaBasis::fit(&x_dev)?.truncate(chosen.pca_threshold);
        let z_dev = pca.transform(&x_dev)?;
        let z_test = pca.transform(&data.x.select_rows(&test))?;
        let model = fit(
            &chosen.params,
            &z_dev,
            &y_dev,
            derive_seed(opts.seed, &[label("outer-fit"), f as u64]),
        )?;
        let y_test = labels_of(&data.labels, &test);
        let score = pr_auc(&model.score(&z_test)?, &y_test)?;
        let blob = model.to_blob();
        log::info!(
            "{algorithm} fold {f}: PR-AUC {score:.4} (inner {:.4}) PCA {} -> {} comps, {}",
            inner[best],
            chosen.pca_threshold,
            pca.n_components(),
            chosen.params
        );
        folds.push(FoldResult {
            fold: f,
            pr_auc: score,
            inner_pr_auc: inner[best],
            chosen: Chosen::Shallow {
                pca_threshold: chosen.pca_threshold,
                n_components: pca.n_components(),
                hyperparams: chosen.params.clone(),
            },
            n_train: dev.len(),
            n_test: test.len(),
            train_users: plan.dev_users(f).len(),
            test_users: plan.test_users(f).len(),
            model_bytes: blob.encoded_len(),
            model_parameters: blob.scalar_count(),
        });
    }
    Ok(outcome(folds))
}

fn outcome(folds: Vec<FoldResult>) -> CvOutcome {
    let mean_pr_auc = folds.iter().map(|f| f.pr_auc).sum::<f64>() / folds.len() as f64;
    CvOutcome { folds, mean_pr_auc }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadCvOptions {
    pub cv: CvOptions,
    pub space: HeadSpace,
    pub r_max: usize,
    pub eta: usize,
}

/// Nested cross-validation of the MLP head. Hyperband picks the shape on
/// the inner folds; the winner is retrained on the development set for
/// `r_max` epochs. Inputs are z-scored with development-set statistics.
pub fn nested_cv_head(data: &Dataset, opts: &HeadCvOptions) -> Result<CvOutcome, HarnessError> {
    let cv = &opts.cv;
    let plan = FoldPlan::new(&data.user_set(), cv.k, cv.seed)?;
    let mut folds = Vec::with_capacity(cv.k);
    for f in 0..cv.k {
        let (dev, test) = outer_split(data, &plan, f)?;
        let raw_dev = data.x.select_rows(&dev);
        let std = Standardizer::fit(&raw_dev);
        let x_dev = std.transform(&raw_dev);
        let y_dev = labels_of(&data.labels, &dev);
        let splits: Vec<(Vec<usize>, Vec<usize>)> = inner_splits(data, &plan, f, &dev)
            .into_iter()
            .filter(|(tr, va)| has_both(&labels_of(&y_dev, tr)) && has_both(&labels_of(&y_dev, va)))
            .collect();
        if splits.is_empty() {
            return Err(HarnessError::SingleClass(format!("every inner split of outer fold {f}")));
        }
        let hb = hyperband_search(
            &opts.space,
            &x_dev,
            &y_dev,
            &splits,
            opts.r_max,
            opts.eta,
            derive_seed(cv.seed, &[label("hyperband"), f as u64]),
        )?;
        let config = HeadConfig {
            seed: derive_seed(cv.seed, &[label("head-refit"), f as u64]),
            ..hb.best
        };
        let model = train(config, &x_dev, &y_dev, None, TrainOptions::epochs(opts.r_max))?;
        let x_test = std.transform(&data.x.select_rows(&test));
        let y_test = labels_of(&data.labels, &test);
        let score = pr_auc(&model.score(&x_test)?, &y_test)?;
        let blob = model.to_blob();
        log::info!(
            "MLP fold {f}: PR-AUC {score:.4} (inner {:.4}) layers={} units={} dropout={}",
            hb.best_score,
            config.hidden_layers,
            config.hidden_units,
            config.dropout_rate
        );
        folds.push(FoldResult {
            fold: f,
            pr_auc: score,
            inner_pr_auc: hb.best_score,
            chosen: Chosen::Head {
                hidden_layers: config.hidden_layers,
                hidden_units: config.hidden_units,
                dropout_rate: config.dropout_rate,
            },
            n_train: dev.len(),
            n_test: test.len(),
            train_users: plan.dev_users(f).len(),
            test_users: plan.test_users(f).len(),
            model_bytes: blob.encoded_len(),
            model_parameters: model.parameter_count(),
        });
    }
    Ok(outcome(folds))
}
