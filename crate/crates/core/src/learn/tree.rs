use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Gini,
    Entropy,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::Gini => "gini",
            Criterion::Entropy => "entropy",
        }
    }

    /// Impurity of a node with positive fraction `p`.
    fn impurity(self, p: f64) -> f64 {
        match self {
            Criterion::Gini => 2.0 * p * (1.0 - p),
            Criterion::Entropy => {
                let h = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
                h(p) + h(1.0 - p)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Weighted positive fraction of the training rows that reached it.
    Leaf { positive: f64 },
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeParams {
    pub criterion: Criterion,
    pub max_depth: usize,
    pub min_samples_split: usize,
    /// Features drawn per split; `None` means all.
    pub max_features: Option<usize>,
}

/// Binary CART tree. `x[feature] <= threshold` goes left.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub(crate) nodes: Vec<Node>,
}

struct Builder<'a, R> {
    x: &'a Matrix,
    y: &'a [bool],
    w: &'a [f64],
    params: TreeParams,
    rng: &'a mut R,
    nodes: Vec<Node>,
}

impl<R: Rng> Builder<'_, R> {
    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let (wt, wp) = idx.iter().fold((0.0, 0.0), |(t, p), &i| {
            (t + self.w[i], p + if self.y[i] { self.w[i] } else { 0.0 })
        });
        let p = if wt > 0.0 { wp / wt } else { 0.5 };
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { positive: p });
        if depth >= self.params.max_depth || idx.len() < self.params.min_samples_split || p == 0.0 || p == 1.0 {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(idx, wt, wp) else {
            return id;
        };
        let mid = partition(idx, |i| self.x.get(i, feature) <= threshold);
        let (l, r) = idx.split_at_mut(mid);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }

    fn best_split(&mut self, idx: &[usize], wt: f64, wp: f64) -> Option<(usize, f64)> {
        let d = self.x.cols();
        let feats: Vec<usize> = match self.params.max_features {
            Some(k) if k < d => sample(self.rng, d, k).into_vec(),
            _ => (0..d).collect(),
        };
        let crit = self.params.criterion;
        let parent = wt * crit.impurity(wp / wt);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order: Vec<usize> = idx.to_vec();
        for f in feats {
            order.sort_by(|&a, &b| self.x.get(a, f).total_cmp(&self.x.get(b, f)));
            let (mut lw, mut lp) = (0.0, 0.0);
            for k in 0..order.len() - 1 {
                let i = order[k];
                lw += self.w[i];
                if self.y[i] {
                    lp += self.w[i];
                }
                let (a, b) = (self.x.get(i, f), self.x.get(order[k + 1], f));
                if a == b || lw <= 0.0 || wt - lw <= 0.0 {
                    continue;
                }
                let rw = wt - lw;
                let child = lw * crit.impurity(lp / lw) + rw * crit.impurity((wp - lp) / rw);
                let gain = parent - child;
                if gain > 1e-12 * wt && best.is_none_or(|(g, _, _)| gain > g) {
                    let mut thr = a + (b - a) / 2.0;
                    if thr >= b {
                        thr = a;
                    }
                    best = Some((gain, f, thr));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

/// Stable two-way partition; returns the count satisfying `pred`.
fn partition(idx: &mut [usize], pred: impl Fn(usize) -> bool) -> usize {
    let (a, b): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| pred(i));
    let mid = a.len();
    idx[..mid].copy_from_slice(&a);
    idx[mid..].copy_from_slice(&b);
    mid
}

impl Tree {
    /// Grow on the rows with positive weight.
    pub(crate) fn fit<R: Rng>(x: &Matrix, y: &[bool], w: &[f64], params: TreeParams, rng: &mut R) -> Tree {
        let mut idx: Vec<usize> = (0..x.rows()).filter(|&i| w[i] > 0.0).collect();
        let mut b = Builder {
            x,
            y,
            w,
            params,
            rng,
            nodes: Vec::new(),
        };
        b.grow(&mut idx, 0);
        Tree { nodes: b.nodes }
    }

    /// Positive fraction at the leaf reached by `row`.
    pub fn leaf_value(&self, row: &[f64]) -> f64 {
        let mut n = 0;
        loop {
            match self.nodes[n] {
                Node::Leaf { positive } => return positive,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => n = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, n: usize) -> usize {
            match t.nodes[n] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }

    /// Four parallel arrays: feature (-1 at leaves), threshold, left, right,
    /// and one of leaf values.
    pub(crate) fn push_arrays(&self, blob: &mut crate::blob::Blob) {
        let col = |f: &dyn Fn(&Node) -> f64| self.nodes.iter().map(f).collect::<Vec<f64>>();
        blob.push(col(&|n| match n {
            Node::Split { feature, .. } => *feature as f64,
            Node::Leaf { .. } => -1.0,
        }));
        blob.push(col(&|n| match n {
            Node::Split { threshold, .. } => *threshold,
            Node::Leaf { .. } => 0.0,
        }));
        blob.push(col(&|n| match n {
            Node::Split { left, .. } => *left as f64,
            Node::Leaf { .. } => 0.0,
        }));
        blob.push(col(&|n| match n {
            Node::Split { right, .. } => *right as f64,
            Node::Leaf { .. } => 0.0,
        }));
        blob.push(col(&|n| match n {
            Node::Leaf { positive } => *positive,
            Node::Split { .. } => 0.0,
        }));
    }
}
