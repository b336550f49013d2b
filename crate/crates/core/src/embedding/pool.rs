use super::{EmbeddingError, EmbeddingSet};
use crate::{FeatureKind, FeatureVector};

/// Collapse window embeddings into `[mean_0..mean_d, std_0..std_d]`.
///
/// Standard deviation uses the population convention, so a single window
/// yields zeros. Each column is summed in ascending value order in f64, which
/// makes the result independent of window order.
pub fn pool(set: &EmbeddingSet) -> Result<FeatureVector, EmbeddingError> {
    let n = set.n_windows();
    if n == 0 {
        return Err(EmbeddingError::EmptySet);
    }
    let d = set.dim();
    let mut means = Vec::with_capacity(d);
    let mut stds = Vec::with_capacity(d);
    let mut column = vec![0.0f64; n];
    for j in 0..d {
        for (i, c) in column.iter_mut().enumerate() {
            *c = set.values()[i * d + j] as f64;
        }
        column.sort_by(f64::total_cmp);
        let mean = column.iter().sum::<f64>() / n as f64;
        let mut sq: Vec<f64> = column.iter().map(|v| (v - mean) * (v - mean)).collect();
        sq.sort_by(f64::total_cmp);
        let var = sq.iter().sum::<f64>() / n as f64;
        means.push(mean);
        stds.push(var.sqrt());
    }
    means.extend(stds);
    Ok(FeatureVector::new(means, FeatureKind::PooledEmbedding))
}
