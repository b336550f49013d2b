use rand::Rng;

use super::tree::{Criterion, Tree, TreeParams};
use super::{check_dim, check_training, LearnError, Matrix};
use crate::blob::Blob;
use crate::rng::{label, rng_for};

pub const RF_TAG: [u8; 4] = *b"RF\0\0";

/// Bagged CART trees with `floor(sqrt(d))` features tried per split.
/// Score is the fraction of trees voting positive.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    trees: Vec<Tree>,
    dim: usize,
    /// Out-of-bag score per training row; `None` when the row landed in
    /// every bootstrap.
    pub oob_scores: Vec<Option<f64>>,
}

/// Hard vote of one leaf; an exact tie counts half.
fn vote(p: f64) -> f64 {
    if p > 0.5 {
        1.0
    } else if p < 0.5 {
        0.0
    } else {
        0.5
    }
}

impl RandomForest {
    pub fn fit(
        x: &Matrix,
        y: &[bool],
        n_estimators: usize,
        min_samples_split: usize,
        max_depth: usize,
        criterion: Criterion,
        seed: u64,
    ) -> Result<Self, LearnError> {
        check_training(x, y)?;
        if n_estimators == 0 || max_depth == 0 || min_samples_split < 2 {
            return Err(LearnError::InvalidParams(format!(
                "RF estimators={n_estimators} depth={max_depth} min_split={min_samples_split}"
            )));
        }
        let (n, d) = (x.rows(), x.cols());
        let params = TreeParams {
            criterion,
            max_depth,
            min_samples_split,
            max_features: Some(((d as f64).sqrt().floor() as usize).max(1)),
        };
        let mut trees = Vec::with_capacity(n_estimators);
        let mut oob_sum = vec![0.0; n];
        let mut oob_cnt = vec![0usize; n];
        for t in 0..n_estimators {
            let mut rng = rng_for(seed, &[label("rf-tree"), t as u64]);
            let mut w = vec![0.0; n];
            for _ in 0..n {
                w[rng.random_range(0..n)] += 1.0;
            }
            let tree = Tree::fit(x, y, &w, params, &mut rng);
            for i in (0..n).filter(|&i| w[i] == 0.0) {
                oob_sum[i] += vote(tree.leaf_value(x.row(i)));
                oob_cnt[i] += 1;
            }
            trees.push(tree);
        }
        let oob_scores = oob_sum
            .iter()
            .zip(&oob_cnt)
            .map(|(&s, &c)| (c > 0).then(|| s / c as f64))
            .collect();
        Ok(Self { trees, dim: d, oob_scores })
    }

    pub fn score(&self, x: &Matrix) -> Result<Vec<f64>, LearnError> {
        check_dim(x, self.dim)?;
        let k = self.trees.len() as f64;
        Ok(x.iter_rows()
            .map(|r| self.trees.iter().map(|t| vote(t.leaf_value(r))).sum::<f64>() / k)
            .collect())
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// `[dim, n_trees]` then five arrays per tree.
    pub fn to_blob(&self) -> Blob {
        let mut blob = Blob::new(RF_TAG);
        blob.push([self.dim as f64, self.trees.len() as f64]);
        for t in &self.trees {
            t.push_arrays(&mut blob);
        }
        blob
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn blobs(seed: u64) -> (Matrix, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..200 {
            let pos = i % 2 == 0;
            let c = if pos { 1.0 } else { -1.0 };
            rows.push((0..4).map(|_| c + rng.random_range(-1.5..1.5)).collect());
            y.push(pos);
        }
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn oob_is_stable_across_seeds() {
        let (x, y) = blobs(1);
        let a = RandomForest::fit(&x, &y, 100, 2, 10, Criterion::Gini, 1).unwrap();
        let b = RandomForest::fit(&x, &y, 100, 2, 10, Criterion::Gini, 2).unwrap();
        let diffs: Vec<f64> = a
            .oob_scores
            .iter()
            .zip(&b.oob_scores)
            .filter_map(|(p, q)| Some((p.as_ref()? - q.as_ref()?).abs()))
            .collect();
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        assert!(diffs.len() == 200 && mean < 0.05, "mean |diff| = {mean}");
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let (x, y) = blobs(4);
        let a = RandomForest::fit(&x, &y, 20, 8, 30, Criterion::Entropy, 9).unwrap();
        let b = RandomForest::fit(&x, &y, 20, 8, 30, Criterion::Entropy, 9).unwrap();
        assert_eq!(a.score(&x).unwrap(), b.score(&x).unwrap());
        assert_eq!(a.to_blob().encode(), b.to_blob().encode());
    }
}
