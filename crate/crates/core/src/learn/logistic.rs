use serde::{Deserialize, Serialize};

use super::{check_dim, check_training, dot, matrix::softplus, sigmoid, LearnError, Matrix, Standardizer};
use crate::blob::Blob;

pub const LR_TAG: [u8; 4] = *b"LR\0\0";

const MAX_ITER: usize = 1000;
const LBFGS_MEMORY: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Penalty {
    L1,
    L2,
}

impl Penalty {
    pub fn name(self) -> &'static str {
        match self {
            Penalty::L1 => "l1",
            Penalty::L2 => "l2",
        }
    }
}

/// Fitted logistic regression. Weights live in raw feature space; the
/// training standardization has been folded into them.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
}

/// `C * sum(logloss) + penalty(w)` on standardized rows; intercept unpenalized.
#[cfg(test)]
pub(crate) fn objective(z: &Matrix, y: &[bool], w: &[f64], b: f64, c: f64, penalty: Penalty) -> f64 {
    let loss: f64 = z
        .iter_rows()
        .zip(y)
        .map(|(r, &yi)| {
            let m = dot(r, w) + b;
            softplus(m) - if yi { m } else { 0.0 }
        })
        .sum();
    let reg = match penalty {
        Penalty::L2 => 0.5 * w.iter().map(|v| v * v).sum::<f64>(),
        Penalty::L1 => w.iter().map(|v| v.abs()).sum(),
    };
    c * loss + reg
}

/// Value and gradient of the smooth l2 objective over `theta = [w, b]`.
fn l2_value_grad(z: &Matrix, y: &[bool], c: f64, theta: &[f64], grad: &mut [f64]) -> f64 {
    let d = z.cols();
    let (w, b) = (&theta[..d], theta[d]);
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut loss = 0.0;
    for (r, &yi) in z.iter_rows().zip(y) {
        let m = dot(r, w) + b;
        let t = if yi { 1.0 } else { 0.0 };
        loss += softplus(m) - t * m;
        let e = sigmoid(m) - t;
        for (g, x) in grad[..d].iter_mut().zip(r) {
            *g += e * x;
        }
        grad[d] += e;
    }
    grad.iter_mut().for_each(|g| *g *= c);
    for (g, wi) in grad[..d].iter_mut().zip(w) {
        *g += wi;
    }
    c * loss + 0.5 * w.iter().map(|v| v * v).sum::<f64>()
}

/// Limited-memory BFGS with Armijo backtracking. Returns the iteration count.
fn lbfgs<F>(theta: &mut [f64], mut f: F, gtol: f64) -> usize
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = theta.len();
    let mut g = vec![0.0; n];
    let mut fx = f(theta, &mut g);
    let mut hist: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::with_capacity(LBFGS_MEMORY);
    let mut next = vec![0.0; n];
    let mut g_next = vec![0.0; n];
    for iter in 0..MAX_ITER {
        if g.iter().fold(0.0f64, |a, v| a.max(v.abs())) < gtol {
            return iter;
        }
        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, yv, rho) in hist.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(yv).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        let gamma = hist
            .last()
            .map_or(1.0 / g.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0), |(s, yv, _)| {
                dot(s, yv) / dot(yv, yv)
            });
        q.iter_mut().for_each(|v| *v *= gamma);
        for ((s, yv, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let beta = rho * dot(yv, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - beta) * si);
        }
        let mut dir: Vec<f64> = q.into_iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            hist.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let mut step = 1.0;
        let mut fnext;
        loop {
            for i in 0..n {
                next[i] = theta[i] + step * dir[i];
            }
            fnext = f(&next, &mut g_next);
            if fnext <= fx + 1e-4 * step * slope || step < 1e-16 {
                break;
            }
            step *= 0.5;
        }
        if step < 1e-16 {
            return iter;
        }
        let s: Vec<f64> = (0..n).map(|i| next[i] - theta[i]).collect();
        let yv: Vec<f64> = (0..n).map(|i| g_next[i] - g[i]).collect();
        let sy = dot(&s, &yv);
        if sy > 1e-12 {
            if hist.len() == LBFGS_MEMORY {
                hist.remove(0);
            }
            hist.push((s, yv, 1.0 / sy));
        }
        let rel = (fx - fnext).abs() / fx.abs().max(fnext.abs()).max(1.0);
        theta.copy_from_slice(&next);
        g.copy_from_slice(&g_next);
        fx = fnext;
        if rel < 1e-14 {
            return iter + 1;
        }
    }
    MAX_ITER
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

/// Change in `C * sum(logloss)` when coordinate `col` (or the intercept
/// when `col` is `None`) moves by `delta`.
fn loss_delta(z: &Matrix, y: &[bool], margins: &[f64], col: Option<usize>, delta: f64) -> f64 {
    let mut acc = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let x = col.map_or(1.0, |j| z.get(i, j));
        if x == 0.0 {
            continue;
        }
        let m0 = margins[i];
        let m1 = m0 + delta * x;
        let t = if yi { 1.0 } else { 0.0 };
        acc += softplus(m1) - softplus(m0) - t * (m1 - m0);
    }
    acc
}

/// Proximal coordinate descent for the l1 objective. Each step tries a
/// Newton move on the coordinate and falls back to the quarter-curvature
/// majorizer when that does not decrease the objective.
fn l1_coordinate_descent(z: &Matrix, y: &[bool], c: f64) -> (Vec<f64>, f64, usize) {
    let (n, d) = (z.rows(), z.cols());
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut margins = vec![0.0; n];
    let bound: Vec<f64> = (0..d)
        .map(|j| 0.25 * c * (0..n).map(|i| z.get(i, j).powi(2)).sum::<f64>())
        .collect();
    let t: Vec<f64> = y.iter().map(|&v| if v { 1.0 } else { 0.0 }).collect();
    for sweep in 0..MAX_ITER {
        let mut max_change: f64 = 0.0;
        for j in 0..=d {
            let col = (j < d).then_some(j);
            let (mut g, mut h) = (0.0, 0.0);
            for i in 0..n {
                let x = col.map_or(1.0, |j| z.get(i, j));
                let p = sigmoid(margins[i]);
                g += (p - t[i]) * x;
                h += p * (1.0 - p) * x * x;
            }
            g *= c;
            h *= c;
            let hb = col.map_or(0.25 * c * n as f64, |j| bound[j]);
            if hb <= 0.0 {
                continue;
            }
            let (old, lam) = match col {
                Some(j) => (w[j], 1.0),
                None => (b, 0.0),
            };
            let step_to = |curv: f64| soft_threshold(old - g / curv, lam / curv);
            let penalty = |v: f64| lam * v.abs();
            let mut new = old;
            if h > 1e-12 {
                let cand = step_to(h);
                let change = loss_delta(z, y, &margins, col, cand - old) + penalty(cand) - penalty(old);
                if change < 0.0 {
                    new = cand;
                }
            }
            if new == old {
                let cand = step_to(hb);
                let change = loss_delta(z, y, &margins, col, cand - old) + penalty(cand) - penalty(old);
                if change < 0.0 {
                    new = cand;
                }
            }
            let delta = new - old;
            if delta != 0.0 {
                for (i, m) in margins.iter_mut().enumerate() {
                    *m += delta * col.map_or(1.0, |j| z.get(i, j));
                }
                match col {
                    Some(j) => w[j] = new,
                    None => b = new,
                }
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < 1e-7 {
            return (w, b, sweep + 1);
        }
    }
    (w, b, MAX_ITER)
}

impl LogisticModel {
    pub fn fit(x: &Matrix, y: &[bool], penalty: Penalty, c: f64) -> Result<Self, LearnError> {
        check_training(x, y)?;
        if !(c > 0.0 && c.is_finite()) {
            return Err(LearnError::InvalidParams(format!("LR regularization {c}")));
        }
        let std = Standardizer::fit(x);
        let z = std.transform(x);
        let d = x.cols();
        let (w, b, iterations) = match penalty {
            Penalty::L2 => {
                let mut theta = vec![0.0; d + 1];
                let gtol = 1e-6 * (c * x.rows() as f64).max(1e-3);
                let it = lbfgs(&mut theta, |t, g| l2_value_grad(&z, y, c, t, g), gtol);
                let b = theta.pop().unwrap();
                (theta, b, it)
            }
            Penalty::L1 => l1_coordinate_descent(&z, y, c),
        };
        let weights: Vec<f64> = w.iter().zip(&std.scale).map(|(wi, s)| wi / s).collect();
        let bias = b - weights.iter().zip(&std.mean).map(|(wi, m)| wi * m).sum::<f64>();
        Ok(Self { weights, bias, iterations })
    }

    pub fn decision(&self, x: &Matrix) -> Result<Vec<f64>, LearnError> {
        check_dim(x, self.weights.len())?;
        Ok(x.iter_rows().map(|r| dot(r, &self.weights) + self.bias).collect())
    }

    pub fn score(&self, x: &Matrix) -> Result<Vec<f64>, LearnError> {
        Ok(self.decision(x)?.into_iter().map(sigmoid).collect())
    }

    /// One array: `[w_1 .. w_d, b]`.
    pub fn to_blob(&self) -> Blob {
        let mut blob = Blob::new(LR_TAG);
        blob.push(self.weights.iter().copied().chain([self.bias]));
        blob
    }

    pub fn from_blob(blob: &Blob) -> Result<Self, LearnError> {
        blob.expect_tag(LR_TAG)?;
        let arr = match blob.arrays.as_slice() {
            [a] if !a.is_empty() => a,
            _ => return Err(LearnError::InvalidParams("LR blob must hold one non-empty array".into())),
        };
        let (w, b) = arr.split_at(arr.len() - 1);
        Ok(Self {
            weights: w.iter().map(|&v| v as f64).collect(),
            bias: b[0] as f64,
            iterations: 0,
        })
    }
}
