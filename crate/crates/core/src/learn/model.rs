use serde::{Deserialize, Serialize};

use super::{AdaBoost, Algorithm, Criterion, Kernel, LearnError, LogisticModel, Matrix, Penalty, RandomForest, SvmModel};
use crate::blob::Blob;

/// One point of a classifier search space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm")]
pub enum Hyperparams {
    #[serde(rename = "LR")]
    Lr {
        penalty: Penalty,
        #[serde(rename = "regularization")]
        c: f64,
    },
    #[serde(rename = "SVM")]
    Svm {
        #[serde(rename = "regularization")]
        c: f64,
        kernel: Kernel,
        #[serde(rename = "kernel_coefficient")]
        gamma: f64,
        degree: u32,
    },
    #[serde(rename = "RF")]
    Rf {
        n_estimators: usize,
        min_samples_split: usize,
        max_depth: usize,
        criterion: Criterion,
    },
    #[serde(rename = "AB")]
    Ab { n_estimators: usize, learning_rate: f64 },
}

impl Hyperparams {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            Hyperparams::Lr { .. } => Algorithm::Lr,
            Hyperparams::Svm { .. } => Algorithm::Svm,
            Hyperparams::Rf { .. } => Algorithm::Rf,
            Hyperparams::Ab { .. } => Algorithm::Ab,
        }
    }
}

impl std::fmt::Display for Hyperparams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Hyperparams::Lr { penalty, c } => write!(f, "LR penalty={} C={c}", penalty.name()),
            Hyperparams::Svm { c, kernel, gamma, degree } => {
                write!(f, "SVM C={c} kernel={} gamma={gamma}", kernel.name())?;
                if *kernel == Kernel::Poly {
                    write!(f, " degree={degree}")?;
                }
                Ok(())
            }
            Hyperparams::Rf {
                n_estimators,
                min_samples_split,
                max_depth,
                criterion,
            } => write!(
                f,
                "RF estimators={n_estimators} min_split={min_samples_split} max_depth={max_depth} criterion={}",
                criterion.name()
            ),
            Hyperparams::Ab {
                n_estimators,
                learning_rate,
            } => write!(f, "AB estimators={n_estimators} learning_rate={learning_rate}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShallowModel {
    Lr(LogisticModel),
    Svm(SvmModel),
    Rf(RandomForest),
    Ab(AdaBoost),
}

pub fn fit(params: &Hyperparams, x: &Matrix, y: &[bool], seed: u64) -> Result<ShallowModel, LearnError> {
    Ok(match *params {
        Hyperparams::Lr { penalty, c } => ShallowModel::Lr(LogisticModel::fit(x, y, penalty, c)?),
        Hyperparams::Svm { c, kernel, gamma, degree } => ShallowModel::Svm(SvmModel::fit(x, y, c, kernel, gamma, degree)?),
        Hyperparams::Rf {
            n_estimators,
            min_samples_split,
            max_depth,
            criterion,
        } => ShallowModel::Rf(RandomForest::fit(
            x,
            y,
            n_estimators,
            min_samples_split,
            max_depth,
            criterion,
            seed,
        )?),
        Hyperparams::Ab {
            n_estimators,
            learning_rate,
        } => ShallowModel::Ab(AdaBoost::fit(x, y, n_estimators, learning_rate, seed)?),
    })
}

pub fn score(model: &ShallowModel, x: &Matrix) -> Result<Vec<f64>, LearnError> {
    model.score(x)
}

impl ShallowModel {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            ShallowModel::Lr(_) => Algorithm::Lr,
            ShallowModel::Svm(_) => Algorithm::Svm,
            ShallowModel::Rf(_) => Algorithm::Rf,
            ShallowModel::Ab(_) => Algorithm::Ab,
        }
    }

    pub fn score(&self, x: &Matrix) -> Result<Vec<f64>, LearnError> {
        match self {
            ShallowModel::Lr(m) => m.score(x),
            ShallowModel::Svm(m) => m.score(x),
            ShallowModel::Rf(m) => m.score(x),
            ShallowModel::Ab(m) => m.score(x),
        }
    }

    pub fn to_blob(&self) -> Blob {
        match self {
            ShallowModel::Lr(m) => m.to_blob(),
            ShallowModel::Svm(m) => m.to_blob(),
            ShallowModel::Rf(m) => m.to_blob(),
            ShallowModel::Ab(m) => m.to_blob(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn accuracy(m: &ShallowModel, x: &Matrix, y: &[bool]) -> f64 {
        let s = m.score(x).unwrap();
        assert!(s.iter().all(|v| (0.0..=1.0).contains(v)));
        s.iter().zip(y).filter(|(p, &l)| (**p > 0.5) == l).count() as f64 / y.len() as f64
    }

    /// 40 points, classes separated by a gap of 2 along x.
    fn separable() -> (Matrix, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let pos = i % 2 == 0;
            let x0 = if pos { rng.random_range(1.0..3.0) } else { rng.random_range(-3.0..-1.0) };
            rows.push(vec![x0, rng.random_range(-3.0..3.0)]);
            y.push(pos);
        }
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    fn xor() -> (Matrix, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..100 {
            for (a, b) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
                rows.push(vec![a + rng.random_range(-0.1..0.1), b + rng.random_range(-0.1..0.1)]);
                y.push((a == 1.0) != (b == 1.0));
            }
        }
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn every_algorithm_separates_blobs() {
        let (x, y) = separable();
        let all = [
            Hyperparams::Lr { penalty: Penalty::L2, c: 10.0 },
            Hyperparams::Lr { penalty: Penalty::L1, c: 10.0 },
            Hyperparams::Svm {
                c: 10.0,
                kernel: Kernel::Rbf,
                gamma: 0.1,
                degree: 3,
            },
            Hyperparams::Rf {
                n_estimators: 20,
                min_samples_split: 2,
                max_depth: 10,
                criterion: Criterion::Gini,
            },
            Hyperparams::Ab {
                n_estimators: 10,
                learning_rate: 1.0,
            },
        ];
        for p in &all {
            let m = fit(p, &x, &y, 3).unwrap();
            assert_eq!(accuracy(&m, &x, &y), 1.0, "{p}");
        }
    }

    #[test]
    fn xor_needs_a_kernel() {
        let (x, y) = xor();
        let svm = fit(
            &Hyperparams::Svm {
                c: 10.0,
                kernel: Kernel::Rbf,
                gamma: 1.0,
                degree: 3,
            },
            &x,
            &y,
            0,
        )
        .unwrap();
        assert_eq!(accuracy(&svm, &x, &y), 1.0);
        for c in [1e-3, 1.0, 1e3] {
            for penalty in [Penalty::L1, Penalty::L2] {
                let lr = fit(&Hyperparams::Lr { penalty, c }, &x, &y, 0).unwrap();
                assert!(accuracy(&lr, &x, &y) <= 0.75);
            }
        }
    }

    #[test]
    fn single_class_and_non_finite_are_rejected() {
        let (x, _) = separable();
        for p in enumerate_all() {
            assert!(matches!(fit(&p, &x, &[true; 40], 0), Err(LearnError::SingleClass)));
        }
        let bad = Matrix::from_rows(&[vec![1.0], vec![f64::INFINITY]]).unwrap();
        assert!(matches!(
            fit(&Hyperparams::Lr { penalty: Penalty::L2, c: 1.0 }, &bad, &[true, false], 0),
            Err(LearnError::NonFiniteFeature { row: 1, col: 0 })
        ));
    }

    fn enumerate_all() -> Vec<Hyperparams> {
        Algorithm::ALL
            .iter()
            .map(|&a| super::super::enumerate_space(a).combinations()[0].clone())
            .collect()
    }

    #[test]
    fn fits_are_deterministic() {
        let (x, y) = xor();
        for p in enumerate_all() {
            let a = fit(&p, &x, &y, 42).unwrap().score(&x).unwrap();
            let b = fit(&p, &x, &y, 42).unwrap().score(&x).unwrap();
            assert_eq!(a, b, "{p}");
        }
    }

    #[test]
    fn hyperparams_serialize_with_algorithm_tag() {
        let p = Hyperparams::Lr { penalty: Penalty::L1, c: 0.1 };
        assert_eq!(
            serde_json::to_string(&p).unwrap(),
            r#"{"algorithm":"LR","penalty":"l1","regularization":0.1}"#
        );
    }
}
