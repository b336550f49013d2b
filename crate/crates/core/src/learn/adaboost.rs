use super::tree::{Criterion, Tree, TreeParams};
use super::{check_dim, check_training, sigmoid, LearnError, Matrix};
use crate::blob::Blob;
use crate::rng::{label, rng_for};

pub const AB_TAG: [u8; 4] = *b"AB\0\0";

/// Discrete SAMME over depth-1 gini stumps. Score is the logistic of
/// `sum_m alpha_m h_m(x)` with `h` in {-1, +1}.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaBoost {
    stumps: Vec<Tree>,
    alphas: Vec<f64>,
    dim: usize,
}

fn predict(t: &Tree, row: &[f64]) -> f64 {
    if t.leaf_value(row) > 0.5 {
        1.0
    } else {
        -1.0
    }
}

impl AdaBoost {
    pub fn fit(x: &Matrix, y: &[bool], n_estimators: usize, learning_rate: f64, seed: u64) -> Result<Self, LearnError> {
        check_training(x, y)?;
        if n_estimators == 0 || learning_rate.is_nan() || learning_rate <= 0.0 {
            return Err(LearnError::InvalidParams(format!(
                "AB estimators={n_estimators} learning_rate={learning_rate}"
            )));
        }
        let n = x.rows();
        let params = TreeParams {
            criterion: Criterion::Gini,
            max_depth: 1,
            min_samples_split: 2,
            max_features: None,
        };
        // stumps see every feature, so the generator is never consulted;
        // it is seeded anyway to keep the tree API uniform
        let mut rng = rng_for(seed, &[label("ab")]);
        let mut w = vec![1.0 / n as f64; n];
        let mut stumps = Vec::new();
        let mut alphas = Vec::new();
        for _ in 0..n_estimators {
            let stump = Tree::fit(x, y, &w, params, &mut rng);
            let miss: Vec<bool> = (0..n).map(|i| (predict(&stump, x.row(i)) > 0.0) != y[i]).collect();
            let total: f64 = w.iter().sum();
            let err = w.iter().zip(&miss).filter(|(_, &m)| m).map(|(v, _)| v).sum::<f64>() / total;
            if err <= 0.0 {
                stumps.push(stump);
                alphas.push(1.0);
                break;
            }
            if err >= 0.5 {
                if stumps.is_empty() {
                    stumps.push(stump);
                    alphas.push(0.0);
                }
                break;
            }
            let alpha = learning_rate * ((1.0 - err) / err).ln();
            for (wi, &m) in w.iter_mut().zip(&miss) {
                if m {
                    *wi *= alpha.exp();
                }
            }
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= s);
            stumps.push(stump);
            alphas.push(alpha);
        }
        Ok(Self {
            stumps,
            alphas,
            dim: x.cols(),
        })
    }

    pub fn margin(&self, x: &Matrix) -> Result<Vec<f64>, LearnError> {
        check_dim(x, self.dim)?;
        Ok(x.iter_rows()
            .map(|r| self.stumps.iter().zip(&self.alphas).map(|(s, a)| a * predict(s, r)).sum())
            .collect())
    }

    pub fn score(&self, x: &Matrix) -> Result<Vec<f64>, LearnError> {
        Ok(self.margin(x)?.into_iter().map(sigmoid).collect())
    }

    pub fn n_stumps(&self) -> usize {
        self.stumps.len()
    }

    /// `[dim]`, the alphas, then five arrays per stump.
    pub fn to_blob(&self) -> Blob {
        let mut blob = Blob::new(AB_TAG);
        blob.push([self.dim as f64]);
        blob.push(self.alphas.iter().copied());
        for s in &self.stumps {
            s.push_arrays(&mut blob);
        }
        blob
    }
}
