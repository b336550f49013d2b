use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{HeadConfig, HeadError};
use crate::blob::Blob;
use crate::harness::pr_auc;
use crate::learn::Matrix;
use crate::rng::{label, rng_for};

pub const MLP_TAG: [u8; 4] = *b"MLP\0";

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Epochs without a validation PR-AUC improvement before stopping.
    pub patience: usize,
}

impl TrainOptions {
    pub fn epochs(epochs: usize) -> Self {
        Self {
            epochs,
            batch_size: 32,
            learning_rate: 1e-3,
            patience: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochRecord {
    /// Mean training-mode cross-entropy over the epoch's batches.
    pub loss: f64,
    pub val_pr_auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
struct Layer {
    inputs: usize,
    outputs: usize,
    /// Row-major `outputs x inputs`.
    w: Vec<f64>,
    b: Vec<f64>,
}

impl Layer {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (o, v) in out.iter_mut().enumerate() {
            let row = &self.w[o * self.inputs..(o + 1) * self.inputs];
            *v = self.b[o] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
    }
}

/// ReLU hidden layers of equal width and a 2-way softmax output.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadModel {
    pub config: HeadConfig,
    layers: Vec<Layer>,
    pub trace: Vec<EpochRecord>,
}

fn softmax2(z: &[f64]) -> [f64; 2] {
    let m = z[0].max(z[1]);
    let (a, b) = ((z[0] - m).exp(), (z[1] - m).exp());
    [a / (a + b), b / (a + b)]
}

/// Per-row state kept for backpropagation.
struct Pass {
    /// Inputs to each layer; `acts[0]` is the row itself.
    acts: Vec<Vec<f64>>,
    /// Dropout multipliers (0 or 1/(1-p)) per hidden layer.
    masks: Vec<Vec<f64>>,
    logits: Vec<f64>,
}

impl HeadModel {
    /// He-uniform weights, zero biases.
    pub fn new(config: HeadConfig) -> Result<Self, HeadError> {
        config.validate()?;
        let mut rng = rng_for(config.seed, &[label("head-init")]);
        let mut dims = vec![config.input_dim];
        dims.extend(std::iter::repeat_n(config.hidden_units, config.hidden_layers));
        dims.push(2);
        let layers = dims
            .windows(2)
            .map(|d| {
                let limit = (6.0 / d[0] as f64).sqrt();
                Layer {
                    inputs: d[0],
                    outputs: d[1],
                    w: (0..d[0] * d[1]).map(|_| rng.random_range(-limit..limit)).collect(),
                    b: vec![0.0; d[1]],
                }
            })
            .collect();
        Ok(Self {
            config,
            layers,
            trace: Vec::new(),
        })
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// All weights and biases, layer by layer, `W` before `b`.
    pub fn parameters(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.w.iter().chain(&l.b).copied()).collect()
    }

    pub fn set_parameters(&mut self, p: &[f64]) -> Result<(), HeadError> {
        if p.len() != self.parameter_count() {
            return Err(HeadError::DimensionMismatch(format!(
                "{} parameters for a head of {}",
                p.len(),
                self.parameter_count()
            )));
        }
        let mut it = p.iter().copied();
        for l in &mut self.layers {
            l.w.iter_mut().chain(l.b.iter_mut()).for_each(|v| *v = it.next().unwrap());
        }
        Ok(())
    }

    fn pass(&self, row: &[f64], rng: Option<&mut ChaCha8Rng>) -> Pass {
        let p = self.config.dropout_rate;
        let keep = 1.0 / (1.0 - p);
        let mut rng = rng;
        let mut acts = vec![row.to_vec()];
        let mut masks = Vec::with_capacity(self.layers.len() - 1);
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let mut out = vec![0.0; layer.outputs];
            layer.apply(acts.last().unwrap(), &mut out);
            if k == last {
                return Pass {
                    acts,
                    masks,
                    logits: out,
                };
            }
            let mask: Vec<f64> = match rng.as_deref_mut() {
                Some(r) if p > 0.0 => (0..out.len())
                    .map(|_| if r.random::<f64>() < p { 0.0 } else { keep })
                    .collect(),
                _ => vec![1.0; out.len()],
            };
            for (v, m) in out.iter_mut().zip(&mask) {
                *v = v.max(0.0) * m;
            }
            masks.push(mask);
            acts.push(out);
        }
        unreachable!("a head has at least one layer")
    }

    fn check_input(&self, x: &Matrix) -> Result<(), HeadError> {
        if x.cols() != self.config.input_dim {
            return Err(HeadError::DimensionMismatch(format!(
                "head expects {} columns, got {}",
                self.config.input_dim,
                x.cols()
            )));
        }
        Ok(())
    }

    /// Pre-softmax outputs. Dropout is sampled from `rng` when given.
    pub fn logits(&self, x: &Matrix, rng: Option<&mut ChaCha8Rng>) -> Result<Matrix, HeadError> {
        self.check_input(x)?;
        let mut rng = rng;
        let mut out = Matrix::zeros(x.rows(), 2);
        for i in 0..x.rows() {
            let p = self.pass(x.row(i), rng.as_deref_mut());
            out.row_mut(i).copy_from_slice(&p.logits);
        }
        Ok(out)
    }

    /// Softmax probabilities `n x 2`; column 1 is the positive class.
    /// Passing `rng` selects training mode (dropout on).
    pub fn forward(&self, x: &Matrix, rng: Option<&mut ChaCha8Rng>) -> Result<Matrix, HeadError> {
        let mut z = self.logits(x, rng)?;
        for i in 0..z.rows() {
            let s = softmax2(z.row(i));
            z.row_mut(i).copy_from_slice(&s);
        }
        Ok(z)
    }

    /// Positive-class probability per row, evaluation mode.
    pub fn score(&self, x: &Matrix) -> Result<Vec<f64>, HeadError> {
        let p = self.forward(x, None)?;
        Ok((0..p.rows()).map(|i| p.get(i, 1)).collect())
    }

    /// Mean cross-entropy and its gradient (same order as
    /// [`parameters`](Self::parameters)) over `rows`.
    fn batch_grad(&self, x: &Matrix, y: &[bool], rows: &[usize], mut rng: Option<&mut ChaCha8Rng>, grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let offsets: Vec<usize> = self
            .layers
            .iter()
            .scan(0, |acc, l| {
                let o = *acc;
                *acc += l.w.len() + l.b.len();
                Some(o)
            })
            .collect();
        let scale = 1.0 / rows.len() as f64;
        let mut loss = 0.0;
        for &i in rows {
            let pass = self.pass(x.row(i), rng.as_deref_mut());
            let probs = softmax2(&pass.logits);
            let t = y[i] as usize;
            loss -= probs[t].max(f64::MIN_POSITIVE).ln();
            let mut delta: Vec<f64> = (0..2)
                .map(|k| scale * (probs[k] - if k == t { 1.0 } else { 0.0 }))
                .collect();
            for (k, layer) in self.layers.iter().enumerate().rev() {
                let input = &pass.acts[k];
                let off = offsets[k];
                let (gw, gb) = grad[off..off + layer.w.len() + layer.b.len()].split_at_mut(layer.w.len());
                for (o, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    gb[o] += d;
                    for (g, a) in gw[o * layer.inputs..(o + 1) * layer.inputs].iter_mut().zip(input) {
                        *g += d * a;
                    }
                }
                if k == 0 {
                    break;
                }
                // back through the previous hidden layer's ReLU and dropout
                let mask = &pass.masks[k - 1];
                let mut prev = vec![0.0; layer.inputs];
                for (o, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    for (p, w) in prev.iter_mut().zip(&layer.w[o * layer.inputs..(o + 1) * layer.inputs]) {
                        *p += d * w;
                    }
                }
                for ((p, a), m) in prev.iter_mut().zip(input).zip(mask) {
                    if *a <= 0.0 {
                        *p = 0.0;
                    } else {
                        *p *= m;
                    }
                }
                delta = prev;
            }
        }
        loss * scale
    }

    /// Evaluation-mode mean cross-entropy and analytic gradient.
    pub fn loss_and_gradient(&self, x: &Matrix, y: &[bool]) -> Result<(f64, Vec<f64>), HeadError> {
        self.check_input(x)?;
        let rows: Vec<usize> = (0..x.rows()).collect();
        let mut g = vec![0.0; self.parameter_count()];
        let loss = self.batch_grad(x, y, &rows, None, &mut g);
        Ok((loss, g))
    }

    /// Arrays: layer dims `[input, u, .., u, 2]`, then `W` and `b` per layer.
    pub fn to_blob(&self) -> Blob {
        let mut blob = Blob::new(MLP_TAG);
        let mut dims = vec![self.layers[0].inputs as f64];
        dims.extend(self.layers.iter().map(|l| l.outputs as f64));
        blob.push(dims);
        for l in &self.layers {
            blob.push(l.w.iter().copied());
            blob.push(l.b.iter().copied());
        }
        blob
    }

    /// Rebuild from a blob; dropout and seed are not stored and come back as 0.
    pub fn from_blob(blob: &Blob) -> Result<Self, HeadError> {
        blob.expect_tag(MLP_TAG)?;
        let bad = |m: &str| HeadError::InvalidConfig(format!("MLP blob: {m}"));
        let dims: Vec<usize> = blob.arrays.first().ok_or_else(|| bad("no dims"))?.iter().map(|&v| v as usize).collect();
        if dims.len() < 3 || blob.arrays.len() != 1 + 2 * (dims.len() - 1) || *dims.last().unwrap() != 2 {
            return Err(bad("layer arrays do not match dims"));
        }
        let units = dims[1];
        if dims[1..dims.len() - 1].iter().any(|&u| u != units) {
            return Err(bad("hidden widths differ"));
        }
        let config = HeadConfig {
            hidden_layers: dims.len() - 2,
            hidden_units: units,
            dropout_rate: 0.0,
            input_dim: dims[0],
            seed: 0,
        };
        let mut layers = Vec::new();
        for (k, d) in dims.windows(2).enumerate() {
            let (w, b) = (&blob.arrays[1 + 2 * k], &blob.arrays[2 + 2 * k]);
            if w.len() != d[0] * d[1] || b.len() != d[1] {
                return Err(bad("layer size"));
            }
            layers.push(Layer {
                inputs: d[0],
                outputs: d[1],
                w: w.iter().map(|&v| v as f64).collect(),
                b: b.iter().map(|&v| v as f64).collect(),
            });
        }
        Ok(Self {
            config,
            layers,
            trace: Vec::new(),
        })
    }
}

/// Adam on mean cross-entropy with seeded shuffling and dropout. With a
/// validation set, PR-AUC is recorded per epoch, training stops after
/// `patience` epochs without improvement and the best epoch's weights are
/// kept.
pub fn train(
    config: HeadConfig,
    x: &Matrix,
    y: &[bool],
    val: Option<(&Matrix, &[bool])>,
    opts: TrainOptions,
) -> Result<HeadModel, HeadError> {
    config.validate()?;
    if x.rows() != y.len() {
        return Err(HeadError::DimensionMismatch(format!("{} rows, {} labels", x.rows(), y.len())));
    }
    let pos = y.iter().filter(|&&v| v).count();
    if pos == 0 || pos == y.len() {
        return Err(HeadError::SingleClass);
    }
    if opts.epochs == 0 || opts.batch_size == 0 {
        return Err(HeadError::InvalidConfig("epochs and batch size must be positive".into()));
    }
    let mut model = HeadModel::new(config)?;
    model.check_input(x)?;
    if let Some((vx, vy)) = val {
        model.check_input(vx)?;
        if vx.rows() != vy.len() {
            return Err(HeadError::DimensionMismatch("validation rows vs labels".into()));
        }
    }
    let mut rng = rng_for(config.seed, &[label("head-train")]);
    let n_params = model.parameter_count();
    let mut theta = model.parameters();
    let (mut m, mut v) = (vec![0.0; n_params], vec![0.0; n_params]);
    let mut grad = vec![0.0; n_params];
    let mut order: Vec<usize> = (0..x.rows()).collect();
    let mut step = 0i32;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut since_best = 0;
    for _epoch in 0..opts.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(opts.batch_size) {
            let loss = model.batch_grad(x, y, batch, Some(&mut rng), &mut grad);
            total += loss * batch.len() as f64;
            step += 1;
            let c1 = 1.0 - ADAM_BETA1.powi(step);
            let c2 = 1.0 - ADAM_BETA2.powi(step);
            for k in 0..n_params {
                m[k] = ADAM_BETA1 * m[k] + (1.0 - ADAM_BETA1) * grad[k];
                v[k] = ADAM_BETA2 * v[k] + (1.0 - ADAM_BETA2) * grad[k] * grad[k];
                theta[k] -= opts.learning_rate * (m[k] / c1) / ((v[k] / c2).sqrt() + ADAM_EPS);
            }
            model.set_parameters(&theta)?;
        }
        let val_pr_auc = match val {
            Some((vx, vy)) => Some(pr_auc(&model.score(vx)?, vy).map_err(|_| HeadError::SingleClass)?),
            None => None,
        };
        model.trace.push(EpochRecord {
            loss: total / x.rows() as f64,
            val_pr_auc,
        });
        if let Some(ap) = val_pr_auc {
            if best.as_ref().is_none_or(|(b, _)| ap > *b) {
                best = Some((ap, theta.clone()));
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= opts.patience {
                    break;
                }
            }
        }
    }
    if let Some((_, params)) = best {
        model.set_parameters(&params)?;
    }
    Ok(model)
}
