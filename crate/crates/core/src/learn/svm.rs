use serde::{Deserialize, Serialize};

use super::{check_dim, check_training, dot, LearnError, Matrix, Standardizer};
use crate::blob::Blob;

pub const SVM_TAG: [u8; 4] = *b"SVM\0";

/// Stopping tolerance on the maximal KKT violation.
pub const SMO_TOL: f64 = 1e-3;
/// Gram matrices are precomputed up to this many training rows.
const GRAM_LIMIT: usize = 4000;
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Rbf,
    Poly,
    Sigmoid,
}

impl Kernel {
    pub fn name(self) -> &'static str {
        match self {
            Kernel::Rbf => "rbf",
            Kernel::Poly => "poly",
            Kernel::Sigmoid => "sigmoid",
        }
    }

    fn code(self) -> f64 {
        match self {
            Kernel::Rbf => 0.0,
            Kernel::Poly => 1.0,
            Kernel::Sigmoid => 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct KernelFn {
    kind: Kernel,
    gamma: f64,
    degree: u32,
    coef0: f64,
}

impl KernelFn {
    fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.kind {
            Kernel::Rbf => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-self.gamma * d2).exp()
            }
            Kernel::Poly => (self.gamma * dot(a, b) + self.coef0).powi(self.degree as i32),
            Kernel::Sigmoid => (self.gamma * dot(a, b) + self.coef0).tanh(),
        }
    }
}

enum Gram<'a> {
    Full { n: usize, k: Vec<f64> },
    OnDemand { x: &'a Matrix, kf: KernelFn, diag: Vec<f64> },
}

impl Gram<'_> {
    fn row(&self, i: usize, buf: &mut Vec<f64>) {
        match self {
            Gram::Full { n, k } => {
                buf.clear();
                buf.extend_from_slice(&k[i * n..(i + 1) * n]);
            }
            Gram::OnDemand { x, kf, .. } => {
                buf.clear();
                buf.extend(x.iter_rows().map(|r| kf.eval(x.row(i), r)));
            }
        }
    }

    fn diag(&self, i: usize) -> f64 {
        match self {
            Gram::Full { n, k } => k[i * n + i],
            Gram::OnDemand { diag, .. } => diag[i],
        }
    }
}

/// Kernel SVM trained by SMO with second-order working-set selection,
/// scores Platt-calibrated on the training decision values.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    standardizer: Standardizer,
    kernel: KernelFn,
    /// Standardized support vectors.
    support: Matrix,
    /// `alpha_i * y_i` per support vector.
    dual_coef: Vec<f64>,
    rho: f64,
    platt_a: f64,
    platt_b: f64,
    /// Final `m(alpha) - M(alpha)` violation.
    pub kkt_gap: f64,
    pub converged: bool,
    pub iterations: usize,
}

pub(crate) struct SmoSolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub gap: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Solve `min 0.5 a'Qa - e'a` s.t. `0 <= a <= C`, `y'a = 0`.
fn smo(gram: &Gram, y: &[f64], c: f64, max_iter: usize) -> SmoSolution {
    let n = y.len();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut ki = Vec::with_capacity(n);
    let mut kj = Vec::with_capacity(n);
    let up = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] < c) || (y[t] < 0.0 && a[t] > 0.0);
    let low = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] > 0.0) || (y[t] < 0.0 && a[t] < c);
    let mut iterations = 0;
    let mut gap;
    loop {
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if up(t, &alpha) && -y[t] * grad[t] >= gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        let mut gmin = f64::INFINITY;
        for t in 0..n {
            if low(t, &alpha) {
                gmin = gmin.min(-y[t] * grad[t]);
            }
        }
        gap = gmax - gmin;
        if i == usize::MAX || gap < SMO_TOL || iterations >= max_iter {
            break;
        }
        gram.row(i, &mut ki);
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !low(t, &alpha) {
                continue;
            }
            let b = gmax + y[t] * grad[t];
            if b > 0.0 {
                let mut a = gram.diag(i) + gram.diag(t) - 2.0 * ki[t];
                if a <= 0.0 {
                    a = TAU;
                }
                let obj = -(b * b) / a;
                if obj <= best {
                    best = obj;
                    j = t;
                }
            }
        }
        if j == usize::MAX {
            break;
        }
        gram.row(j, &mut kj);
        iterations += 1;
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = gram.diag(i) + gram.diag(j) - 2.0 * ki[j];
        if quad <= 0.0 {
            quad = TAU;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            // Q_ti = y_t y_i K_ti
            grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        }
    }
    // rho as in libsvm: mean over free vectors, else midpoint of the bounds
    let (mut ub, mut lb, mut sum, mut nfree) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            nfree += 1;
            sum += yg;
        }
    }
    let rho = if nfree > 0 { sum / nfree as f64 } else { (ub + lb) / 2.0 };
    SmoSolution {
        alpha,
        rho,
        gap,
        converged: gap < SMO_TOL,
        iterations,
    }
}

/// Platt's sigmoid fit with the Lin-Lin-Weng Newton iteration.
/// Returns `(A, B)` for `p = 1 / (1 + exp(A f + B))`.
pub(crate) fn platt(dec: &[f64], y: &[bool]) -> (f64, f64) {
    let prior1 = y.iter().filter(|&&v| v).count() as f64;
    let prior0 = y.len() as f64 - prior1;
    let hi = (prior1 + 1.0) / (prior1 + 2.0);
    let lo = 1.0 / (prior0 + 2.0);
    let t: Vec<f64> = y.iter().map(|&v| if v { hi } else { lo }).collect();
    let (mut a, mut b) = (0.0, ((prior0 + 1.0) / (prior1 + 1.0)).ln());
    let sigma = 1e-12;
    let fval = |a: f64, b: f64| -> f64 {
        dec.iter()
            .zip(&t)
            .map(|(&f, &ti)| {
                let fa = f * a + b;
                if fa >= 0.0 {
                    ti * fa + (-fa).exp().ln_1p()
                } else {
                    (ti - 1.0) * fa + fa.exp().ln_1p()
                }
            })
            .sum()
    };
    let mut fv = fval(a, b);
    for _ in 0..100 {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (sigma, sigma, 0.0, 0.0, 0.0);
        for (&f, &ti) in dec.iter().zip(&t) {
            let fa = f * a + b;
            let (p, q) = if fa >= 0.0 {
                let e = (-fa).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = fa.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += f * f * d2;
            h22 += d2;
            h21 += f * d2;
            let d1 = ti - p;
            g1 += f * d1;
            g2 += d1;
        }
        if g1.abs() < 1e-5 && g2.abs() < 1e-5 {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        let mut step = 1.0;
        while step >= 1e-10 {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = fval(na, nb);
            if nf < fv + 1e-4 * step * gd {
                a = na;
                b = nb;
                fv = nf;
                break;
            }
            step /= 2.0;
        }
        if step < 1e-10 {
            break;
        }
    }
    (a, b)
}

impl SvmModel {
    pub fn fit(x: &Matrix, y: &[bool], c: f64, kernel: Kernel, gamma: f64, degree: u32) -> Result<Self, LearnError> {
        check_training(x, y)?;
        if !(c > 0.0 && gamma > 0.0 && c.is_finite() && gamma.is_finite()) || degree == 0 {
            return Err(LearnError::InvalidParams(format!(
                "SVM C={c} gamma={gamma} degree={degree}"
            )));
        }
        let standardizer = Standardizer::fit(x);
        let z = standardizer.transform(x);
        let kf = KernelFn {
            kind: kernel,
            gamma,
            degree,
            coef0: 0.0,
        };
        let n = z.rows();
        let gram = if n <= GRAM_LIMIT {
            let mut k = vec![0.0; n * n];
            for i in 0..n {
                for j in i..n {
                    let v = kf.eval(z.row(i), z.row(j));
                    k[i * n + j] = v;
                    k[j * n + i] = v;
                }
            }
            Gram::Full { n, k }
        } else {
            let diag = z.iter_rows().map(|r| kf.eval(r, r)).collect();
            Gram::OnDemand { x: &z, kf, diag }
        };
        let ys: Vec<f64> = y.iter().map(|&v| if v { 1.0 } else { -1.0 }).collect();
        let sol = smo(&gram, &ys, c, (100 * n).max(10_000));
        if !sol.converged {
            log::warn!(
                "SMO stopped after {} iterations with KKT gap {:.3e}",
                sol.iterations,
                sol.gap
            );
        }
        let sv: Vec<usize> = (0..n).filter(|&i| sol.alpha[i] > 0.0).collect();
        let support = z.select_rows(&sv);
        let dual_coef: Vec<f64> = sv.iter().map(|&i| sol.alpha[i] * ys[i]).collect();
        let mut model = Self {
            standardizer,
            kernel: kf,
            support,
            dual_coef,
            rho: sol.rho,
            platt_a: 0.0,
            platt_b: 0.0,
            kkt_gap: sol.gap,
            converged: sol.converged,
            iterations: sol.iterations,
        };
        let dec = model.decision_standardized(&z);
        let (a, b) = platt(&dec, y);
        model.platt_a = a;
        model.platt_b = b;
        Ok(model)
    }

    fn decision_standardized(&self, z: &Matrix) -> Vec<f64> {
        z.iter_rows()
            .map(|r| {
                self.support
                    .iter_rows()
                    .zip(&self.dual_coef)
                    .map(|(s, a)| a * self.kernel.eval(s, r))
                    .sum::<f64>()
                    - self.rho
            })
            .collect()
    }

    /// Raw margin `sum_i alpha_i y_i K(x_i, x) - rho`.
    pub fn decision(&self, x: &Matrix) -> Result<Vec<f64>, LearnError> {
        check_dim(x, self.standardizer.mean.len())?;
        Ok(self.decision_standardized(&self.standardizer.transform(x)))
    }

    pub fn score(&self, x: &Matrix) -> Result<Vec<f64>, LearnError> {
        Ok(self
            .decision(x)?
            .into_iter()
            .map(|f| super::sigmoid(-(self.platt_a * f + self.platt_b)))
            .collect())
    }

    pub fn n_support(&self) -> usize {
        self.dual_coef.len()
    }

    /// Arrays: `[kernel, gamma, degree, coef0, rho, A, B, dim]`, mean,
    /// scale, dual coefficients, support vectors row-major.
    pub fn to_blob(&self) -> Blob {
        let mut blob = Blob::new(SVM_TAG);
        blob.push([
            self.kernel.kind.code(),
            self.kernel.gamma,
            self.kernel.degree as f64,
            self.kernel.coef0,
            self.rho,
            self.platt_a,
            self.platt_b,
            self.support.cols() as f64,
        ]);
        blob.push(self.standardizer.mean.iter().copied());
        blob.push(self.standardizer.scale.iter().copied());
        blob.push(self.dual_coef.iter().copied());
        blob.push(self.support.data().iter().copied());
        blob
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent KKT check from the final dual variables.
    fn kkt_violation(x: &Matrix, y: &[bool], c: f64, kernel: Kernel, gamma: f64, degree: u32) -> (f64, bool) {
        let m = SvmModel::fit(x, y, c, kernel, gamma, degree).unwrap();
        let z = m.standardizer.transform(x);
        let kf = m.kernel;
        let n = x.rows();
        // rebuild alpha over all rows by matching support rows
        let mut alpha = vec![0.0; n];
        for (s, a) in m.support.iter_rows().zip(&m.dual_coef) {
            let i = (0..n).find(|&i| z.row(i) == s && alpha[i] == 0.0).unwrap();
            alpha[i] = a.abs();
        }
        let ys: Vec<f64> = y.iter().map(|&v| if v { 1.0 } else { -1.0 }).collect();
        let grad: Vec<f64> = (0..n)
            .map(|t| {
                (0..n).map(|s| ys[t] * ys[s] * kf.eval(z.row(t), z.row(s)) * alpha[s]).sum::<f64>() - 1.0
            })
            .collect();
        let mut up = f64::NEG_INFINITY;
        let mut low = f64::INFINITY;
        for t in 0..n {
            let v = -ys[t] * grad[t];
            if (ys[t] > 0.0 && alpha[t] < c) || (ys[t] < 0.0 && alpha[t] > 0.0) {
                up = up.max(v);
            }
            if (ys[t] > 0.0 && alpha[t] > 0.0) || (ys[t] < 0.0 && alpha[t] < c) {
                low = low.min(v);
            }
        }
        let eq: f64 = alpha.iter().zip(&ys).map(|(a, y)| a * y).sum();
        assert!(eq.abs() < 1e-9 * c.max(1.0) * n as f64, "y'a = {eq}");
        (up - low, m.converged)
    }

    fn blobs(n: usize, seed: u64) -> (Matrix, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let pos = i % 2 == 0;
            let cx = if pos { 1.5 } else { -1.5 };
            rows.push(vec![cx + rng.random_range(-1.0..1.0), rng.random_range(-2.0..2.0)]);
            y.push(pos);
        }
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn kkt_holds_after_every_fit() {
        let (x, y) = blobs(60, 3);
        for kernel in [Kernel::Rbf, Kernel::Poly, Kernel::Sigmoid] {
            for c in [0.01, 1.0, 100.0] {
                let (gap, converged) = kkt_violation(&x, &y, c, kernel, 0.1, 3);
                if converged {
                    assert!(gap < SMO_TOL * 1.0001, "{kernel:?} C={c} gap={gap}");
                }
            }
        }
    }

    #[test]
    fn platt_is_monotone_increasing_in_margin() {
        let (x, y) = blobs(80, 8);
        let m = SvmModel::fit(&x, &y, 1.0, Kernel::Rbf, 0.5, 3).unwrap();
        assert!(m.platt_a < 0.0);
        let s = m.score(&x).unwrap();
        let d = m.decision(&x).unwrap();
        for i in 0..80 {
            for j in 0..80 {
                if d[i] < d[j] {
                    assert!(s[i] <= s[j]);
                }
            }
        }
        assert!(s.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn platt_recovers_known_sigmoid() {
        // labels drawn from p = sigmoid(2 f - 0.5), large sample
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f: Vec<f64> = (0..20000).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y: Vec<bool> = f
            .iter()
            .map(|&v| rng.random::<f64>() < 1.0 / (1.0 + (-(2.0 * v - 0.5)).exp()))
            .collect();
        let (a, b) = platt(&f, &y);
        assert!((a + 2.0).abs() < 0.1, "A={a}");
        assert!((b - 0.5).abs() < 0.1, "B={b}");
    }

    #[test]
    fn blob_counts() {
        let (x, y) = blobs(30, 2);
        let m = SvmModel::fit(&x, &y, 1.0, Kernel::Rbf, 1.0, 3).unwrap();
        let b = m.to_blob();
        assert_eq!(b.scalar_count(), 8 + 2 + 2 + m.n_support() * 3);
    }
}
