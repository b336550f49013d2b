use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::mlp::{train, TrainOptions};
use super::{HeadConfig, HeadError, HeadSpace};
use crate::learn::Matrix;
use crate::rng::{derive_seed, label, rng_for};

/// One bracket of the schedule: `rungs[i] = (configs, epochs)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bracket {
    pub s: usize,
    pub rungs: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RungRecord {
    pub bracket: usize,
    pub rung: usize,
    pub epochs: usize,
    /// Every config trained at this rung with its mean validation PR-AUC.
    pub results: Vec<(HeadConfig, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperbandResult {
    pub best: HeadConfig,
    pub best_score: f64,
    pub trace: Vec<RungRecord>,
}

/// Largest `s` with `eta^s <= r`, in integers.
fn floor_log(r: usize, eta: usize) -> usize {
    let (mut s, mut p) = (0, eta);
    while p <= r {
        s += 1;
        p *= eta;
    }
    s
}

/// Bracket table for budget `r_max` and reduction factor `eta`, from the
/// most exploratory bracket down to `s = 0`.
pub fn hyperband_schedule(r_max: usize, eta: usize) -> Result<Vec<Bracket>, HeadError> {
    if eta < 2 || r_max < eta {
        return Err(HeadError::InvalidBudget(format!("R={r_max} eta={eta}; need R >= eta >= 2")));
    }
    let s_max = floor_log(r_max, eta);
    Ok((0..=s_max)
        .rev()
        .map(|s| {
            let es = eta.pow(s as u32);
            let n = ((s_max + 1) * es).div_ceil(s + 1);
            let rungs = (0..=s)
                .map(|i| {
                    let n_i = n / eta.pow(i as u32);
                    let r_i = r_max as f64 * (eta as f64).powi(i as i32 - s as i32);
                    (n_i, (r_i.round() as usize).max(1))
                })
                .collect();
            Bracket { s, rungs }
        })
        .collect())
}

/// Mean validation PR-AUC over `folds` for a config trained `epochs` epochs.
fn evaluate(config: HeadConfig, x: &Matrix, y: &[bool], folds: &[(Vec<usize>, Vec<usize>)], epochs: usize) -> Result<f64, HeadError> {
    let mut total = 0.0;
    for (k, (tr, va)) in folds.iter().enumerate() {
        let ytr: Vec<bool> = tr.iter().map(|&i| y[i]).collect();
        let yva: Vec<bool> = va.iter().map(|&i| y[i]).collect();
        let cfg = HeadConfig {
            seed: derive_seed(config.seed, &[k as u64]),
            ..config
        };
        let m = train(
            cfg,
            &x.select_rows(tr),
            &ytr,
            Some((&x.select_rows(va), &yva)),
            TrainOptions::epochs(epochs),
        )?;
        total += m.trace.iter().filter_map(|e| e.val_pr_auc).fold(f64::NEG_INFINITY, f64::max);
    }
    Ok(total / folds.len() as f64)
}

/// Hyperband over `space`. Configs are drawn uniformly per bracket,
/// retrained from scratch at each rung, scored by mean inner-fold
/// PR-AUC, and the top `floor(n_i / eta)` move on.
pub fn hyperband_search(
    space: &HeadSpace,
    x: &Matrix,
    y: &[bool],
    folds: &[(Vec<usize>, Vec<usize>)],
    r_max: usize,
    eta: usize,
    seed: u64,
) -> Result<HyperbandResult, HeadError> {
    let schedule = hyperband_schedule(r_max, eta)?;
    if space.shapes.is_empty() || folds.is_empty() {
        return Err(HeadError::InvalidConfig("empty search space or no folds".into()));
    }
    let mut trace = Vec::new();
    let mut best: Option<(f64, usize, HeadConfig)> = None;
    for bracket in &schedule {
        let mut rng = rng_for(seed, &[label("hyperband"), bracket.s as u64]);
        let mut pool: Vec<HeadConfig> = (0..bracket.rungs[0].0)
            .map(|j| {
                let shape = space.shapes[rng.random_range(0..space.shapes.len())];
                HeadConfig::new(shape, x.cols(), derive_seed(seed, &[label("hb-config"), bracket.s as u64, j as u64]))
            })
            .collect();
        for (i, &(_, epochs)) in bracket.rungs.iter().enumerate() {
            let scores: Vec<f64> = pool
                .par_iter()
                .map(|&c| evaluate(c, x, y, folds, epochs))
                .collect::<Result<_, _>>()?;
            let results: Vec<(HeadConfig, f64)> = pool.iter().copied().zip(scores).collect();
            for &(c, sc) in &results {
                log::debug!("hyperband s={} rung={i} epochs={epochs} {:?} -> {sc:.4}", bracket.s, c.shape());
                let better = match &best {
                    None => true,
                    Some((b, e, _)) => sc > *b || (sc == *b && epochs > *e),
                };
                if better {
                    best = Some((sc, epochs, c));
                }
            }
            let keep = bracket.rungs.get(i + 1).map_or(0, |r| r.0);
            let mut ranked = results.clone();
            ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
            pool = ranked.into_iter().take(keep).map(|(c, _)| c).collect();
            trace.push(RungRecord {
                bracket: bracket.s,
                rung: i,
                epochs,
                results,
            });
        }
    }
    let (best_score, _, best) = best.expect("at least one config evaluated");
    Ok(HyperbandResult { best, best_score, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::head::HeadShape;

    #[test]
    fn schedule_for_27_and_3() {
        let s = hyperband_schedule(27, 3).unwrap();
        let firsts: Vec<(usize, usize)> = s.iter().map(|b| b.rungs[0]).collect();
        assert_eq!(firsts, vec![(27, 1), (12, 3), (6, 9), (4, 27)]);
        assert_eq!(s[0].rungs, vec![(27, 1), (9, 3), (3, 9), (1, 27)]);
        assert_eq!(s[1].rungs, vec![(12, 3), (4, 9), (1, 27)]);
    }

    #[test]
    fn bad_budgets() {
        assert!(hyperband_schedule(2, 3).is_err());
        assert!(hyperband_schedule(27, 1).is_err());
        assert_eq!(hyperband_schedule(3, 3).unwrap().len(), 2);
    }

    #[test]
    fn singleton_space_returns_its_config() {
        let shape = HeadShape {
            hidden_layers: 1,
            hidden_units: 4,
            dropout_rate: 0.0,
        };
        let n = 40;
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 / n as f64, ((i * 7) % 5) as f64]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<bool> = (0..n).map(|i| i >= n / 2).collect();
        let folds = vec![
            ((0..n).filter(|i| i % 2 == 0).collect(), (0..n).filter(|i| i % 2 == 1).collect()),
        ];
        let r = hyperband_search(&HeadSpace { shapes: vec![shape] }, &x, &y, &folds, 9, 3, 1).unwrap();
        assert_eq!(r.best.shape(), shape);
        assert!(r.trace.iter().any(|t| t.epochs == 9));
    }
}
