use rand::seq::index::sample;

use super::logistic::Penalty;
use super::svm::Kernel;
use super::tree::Criterion;
use super::{Algorithm, Hyperparams, PCA_THRESHOLDS};
use crate::rng::{label, rng_for};

/// Grids up to this many `(threshold, params)` points are searched
/// exhaustively.
pub const GRID_LIMIT: usize = 500;
/// Trials drawn (without replacement) from larger grids.
pub const RANDOM_TRIALS: usize = 60;

const LOG_C: [f64; 7] = [1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0];
const LOG_GAMMA: [f64; 5] = [1e-3, 1e-2, 1e-1, 1.0, 10.0];

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Real(f64),
    Int(usize),
    Text(&'static str),
}

/// Parameter names and value sets for one algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub algorithm: Algorithm,
    pub params: Vec<(&'static str, Vec<ParamValue>)>,
}

impl SearchSpace {
    pub fn size(&self) -> usize {
        self.params.iter().map(|(_, v)| v.len()).product()
    }

    pub fn values(&self, name: &str) -> Option<&[ParamValue]> {
        self.params.iter().find(|(n, _)| *n == name).map(|(_, v)| v.as_slice())
    }

    /// Cartesian product in row-major order (last parameter fastest).
    pub fn combinations(&self) -> Vec<Hyperparams> {
        let ints = |name| -> Vec<usize> {
            self.values(name)
                .unwrap()
                .iter()
                .map(|v| match v {
                    ParamValue::Int(i) => *i,
                    _ => unreachable!(),
                })
                .collect()
        };
        let reals = |name| -> Vec<f64> {
            self.values(name)
                .unwrap()
                .iter()
                .map(|v| match v {
                    ParamValue::Real(r) => *r,
                    _ => unreachable!(),
                })
                .collect()
        };
        let mut out = Vec::with_capacity(self.size());
        match self.algorithm {
            Algorithm::Lr => {
                for penalty in [Penalty::L1, Penalty::L2] {
                    for &c in &reals("regularization") {
                        out.push(Hyperparams::Lr { penalty, c });
                    }
                }
            }
            Algorithm::Svm => {
                for &c in &reals("regularization") {
                    for kernel in [Kernel::Rbf, Kernel::Poly, Kernel::Sigmoid] {
                        for &gamma in &reals("kernel coefficient") {
                            for degree in ints("degree of poly kernel") {
                                out.push(Hyperparams::Svm {
                                    c,
                                    kernel,
                                    gamma,
                                    degree: degree as u32,
                                });
                            }
                        }
                    }
                }
            }
            Algorithm::Rf => {
                for n_estimators in ints("estimators") {
                    for min_samples_split in ints("min samples split") {
                        for max_depth in ints("max depth") {
                            for criterion in [Criterion::Entropy, Criterion::Gini] {
                                out.push(Hyperparams::Rf {
                                    n_estimators,
                                    min_samples_split,
                                    max_depth,
                                    criterion,
                                });
                            }
                        }
                    }
                }
            }
            Algorithm::Ab => {
                for n_estimators in ints("estimators") {
                    for &learning_rate in &reals("learning rate") {
                        out.push(Hyperparams::Ab {
                            n_estimators,
                            learning_rate,
                        });
                    }
                }
            }
        }
        out
    }
}

pub fn enumerate_space(algorithm: Algorithm) -> SearchSpace {
    use ParamValue::*;
    let reals = |v: &[f64]| v.iter().map(|&x| Real(x)).collect::<Vec<_>>();
    let ints = |v: &[usize]| v.iter().map(|&x| Int(x)).collect::<Vec<_>>();
    let params = match algorithm {
        Algorithm::Svm => vec![
            ("regularization", reals(&LOG_C)),
            ("kernel", vec![Text("rbf"), Text("poly"), Text("sigmoid")]),
            ("kernel coefficient", reals(&LOG_GAMMA)),
            ("degree of poly kernel", ints(&[2, 3, 4, 5])),
        ],
        Algorithm::Ab => vec![
            ("estimators", ints(&[10, 20, 50, 100])),
            ("learning rate", reals(&[1.0, 0.5, 0.1, 0.05, 0.01, 0.001])),
        ],
        Algorithm::Lr => vec![
            ("penalty", vec![Text("l1"), Text("l2")]),
            ("regularization", reals(&LOG_C)),
        ],
        Algorithm::Rf => vec![
            ("estimators", ints(&[10, 20, 50, 100])),
            ("min samples split", ints(&[2, 8, 10, 12])),
            ("max depth", ints(&[10, 30, 50])),
            ("split criterion", vec![Text("entropy"), Text("gini")]),
        ],
    };
    SearchSpace { algorithm, params }
}

/// One point of the joint PCA x classifier search.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub pca_threshold: f64,
    pub params: Hyperparams,
}

/// Points to evaluate for `algorithm`: the whole `PCA_THRESHOLDS x space`
/// grid when it has at most [`GRID_LIMIT`] points, else `trials` distinct
/// points drawn with the seed. Order is the grid order either way.
pub fn candidates(algorithm: Algorithm, seed: u64, trials: usize) -> Vec<Candidate> {
    let combos = enumerate_space(algorithm).combinations();
    let all: Vec<Candidate> = PCA_THRESHOLDS
        .iter()
        .flat_map(|&t| {
            combos.iter().map(move |p| Candidate {
                pca_threshold: t,
                params: p.clone(),
            })
        })
        .collect();
    if all.len() <= GRID_LIMIT || trials >= all.len() {
        return all;
    }
    let mut rng = rng_for(seed, &[label("search"), label(algorithm.name())]);
    let mut picked = sample(&mut rng, all.len(), trials).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| all[i].clone()).collect()
}
