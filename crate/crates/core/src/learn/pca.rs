//! Principal component analysis by eigendecomposition of the sample
//! covariance (or of the Gram matrix when there are fewer rows than
//! columns).

use nalgebra::{DMatrix, SymmetricEigen};

use super::{LearnError, Matrix};

/// Thresholds of cumulative explained variance searched during tuning.
pub const PCA_THRESHOLDS: [f64; 9] = [0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 0.99];

/// Full spectrum of one training set; truncate with [`PcaBasis::truncate`].
#[derive(Debug, Clone)]
pub struct PcaBasis {
    mean: Vec<f64>,
    /// Unit eigenvectors, descending eigenvalue.
    components: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
    total_variance: f64,
}

/// Fitted projection onto the leading `k` components.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `k` orthonormal rows of length `d`.
    pub components: Vec<Vec<f64>>,
    pub explained_variance_ratio: Vec<f64>,
    pub threshold: f64,
}

impl PcaBasis {
    pub fn fit(x: &Matrix) -> Result<Self, LearnError> {
        let (n, d) = (x.rows(), x.cols());
        if n < 2 {
            return Err(LearnError::InvalidParams(format!("PCA needs at least 2 rows, got {n}")));
        }
        x.check_finite()?;
        let mean = x.column_means();
        let centered = DMatrix::from_fn(n, d, |i, j| x.get(i, j) - mean[j]);
        let denom = (n - 1) as f64;
        let total_variance: f64 = centered.iter().map(|v| v * v).sum::<f64>() / denom;
        if total_variance.is_nan() || total_variance <= 0.0 {
            return Err(LearnError::DegenerateData);
        }

        let mut pairs: Vec<(f64, Vec<f64>)> = if n - 1 < d {
            // Eigenvectors of X X^T map to those of X^T X through X^T u / sqrt(lambda).
            let gram = (&centered * centered.transpose()) / denom;
            let eig = SymmetricEigen::new(gram);
            let max_l = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
            (0..n)
                .filter(|&i| eig.eigenvalues[i] > max_l * 1e-12)
                .map(|i| {
                    let l = eig.eigenvalues[i];
                    let u = eig.eigenvectors.column(i);
                    let v = centered.transpose() * u;
                    let norm = v.norm();
                    (l, v.iter().map(|x| x / norm).collect())
                })
                .collect()
        } else {
            let cov = (centered.transpose() * &centered) / denom;
            let eig = SymmetricEigen::new(cov);
            (0..d)
                .map(|i| {
                    (
                        eig.eigenvalues[i].max(0.0),
                        eig.eigenvectors.column(i).iter().cloned().collect(),
                    )
                })
                .collect()
        };
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        // Deterministic sign: largest-magnitude entry positive.
        for (_, v) in pairs.iter_mut() {
            let big = v.iter().cloned().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            if big < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        let (eigenvalues, components) = pairs.into_iter().unzip();
        Ok(Self {
            mean,
            components,
            eigenvalues,
            total_variance,
        })
    }

    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|l| l / self.total_variance).collect()
    }

    /// Smallest number of leading components whose cumulative ratio reaches `threshold`.
    pub fn n_components_for(&self, threshold: f64) -> usize {
        let mut cum = 0.0;
        for (i, r) in self.explained_variance_ratio().iter().enumerate() {
            cum += r;
            if cum >= threshold * (1.0 - 1e-12) {
                return i + 1;
            }
        }
        self.components.len()
    }

    pub fn truncate(&self, threshold: f64) -> PcaModel {
        let k = self.n_components_for(threshold).max(1).min(self.components.len());
        PcaModel {
            mean: self.mean.clone(),
            components: self.components[..k].to_vec(),
            explained_variance_ratio: self.explained_variance_ratio()[..k].to_vec(),
            threshold,
        }
    }
}

/// Fit and truncate in one step.
pub fn pca_fit(x: &Matrix, threshold: f64) -> Result<PcaModel, LearnError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(LearnError::InvalidParams(format!("PCA threshold {threshold}")));
    }
    Ok(PcaBasis::fit(x)?.truncate(threshold))
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| c.iter().zip(row).zip(&self.mean).map(|((w, x), m)| w * (x - m)).sum())
            .collect()
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix, LearnError> {
        if x.cols() != self.input_dim() {
            return Err(LearnError::DimensionMismatch(format!(
                "PCA fitted on {} columns, got {}",
                self.input_dim(),
                x.cols()
            )));
        }
        let k = self.n_components();
        let mut data = Vec::with_capacity(x.rows() * k);
        for r in x.iter_rows() {
            data.extend(self.transform_row(r));
        }
        Matrix::new(x.rows(), k, data)
    }

    /// Map projected coordinates back to input space.
    pub fn inverse_transform_row(&self, z: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (c, &zk) in self.components.iter().zip(z) {
            for (o, w) in out.iter_mut().zip(c) {
                *o += zk * w;
            }
        }
        out
    }
}
