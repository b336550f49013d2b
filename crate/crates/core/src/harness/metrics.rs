use super::HarnessError;

/// Step-wise average precision: the mean, over positives in descending
/// score order, of the precision at that positive's rank.
///
/// Tied scores are scored by the exact expectation over every order of
/// the tied items, so the result does not depend on input order.
pub fn pr_auc(scores: &[f64], labels: &[bool]) -> Result<f64, HarnessError> {
    if scores.len() != labels.len() {
        return Err(HarnessError::DimensionMismatch(format!(
            "{} scores, {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(HarnessError::DimensionMismatch(format!("score {i} is NaN")));
    }
    let total_pos = labels.iter().filter(|&&l| l).count();
    if total_pos == 0 || total_pos == labels.len() {
        return Err(HarnessError::SingleClass("pr_auc labels".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut seen, mut tp, mut sum) = (0usize, 0usize, 0.0);
    let mut start = 0;
    while start < order.len() {
        let s = scores[order[start]];
        let end = start + order[start..].iter().take_while(|&&i| scores[i] == s).count();
        let g = end - start;
        let p = order[start..end].iter().filter(|&&i| labels[i]).count();
        if p > 0 {
            // position j in the group is positive with probability p/g; given
            // that, the expected positives ahead of it in the group are
            // (j-1)(p-1)/(g-1)
            let pf = p as f64;
            let gf = g as f64;
            for j in 1..=g {
                let ahead = if g > 1 { (j - 1) as f64 * (pf - 1.0) / (gf - 1.0) } else { 0.0 };
                sum += pf / gf * (tp as f64 + 1.0 + ahead) / (seen + j) as f64;
            }
        }
        seen += g;
        tp += p;
        start = end;
    }
    Ok(sum / total_pos as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Average over every permutation of the input (so over every tie
    /// order) of the plain no-tie AP.
    fn permutation_oracle(scores: &[f64], labels: &[bool]) -> f64 {
        fn ap(order: &[usize], labels: &[bool]) -> f64 {
            let (mut tp, mut s) = (0.0, 0.0);
            for (r, &i) in order.iter().enumerate() {
                if labels[i] {
                    tp += 1.0;
                    s += tp / (r + 1) as f64;
                }
            }
            s / tp
        }
        fn permute(k: usize, v: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if k == v.len() {
                out.push(v.clone());
                return;
            }
            for i in k..v.len() {
                v.swap(k, i);
                permute(k + 1, v, out);
                v.swap(k, i);
            }
        }
        let mut all = Vec::new();
        permute(0, &mut (0..scores.len()).collect(), &mut all);
        let mut total = 0.0;
        let mut count = 0.0;
        for p in all {
            // keep only permutations consistent with descending score
            if p.windows(2).all(|w| scores[w[0]] >= scores[w[1]]) {
                total += ap(&p, labels);
                count += 1.0;
            }
        }
        total / count
    }

    #[test]
    fn hand_cases() {
        assert_eq!(pr_auc(&[0.9, 0.8, 0.1], &[true, true, false]).unwrap(), 1.0);
        assert_eq!(pr_auc(&[0.1, 0.9], &[true, false]).unwrap(), 0.5);
        assert!(pr_auc(&[0.1, 0.9], &[true, true]).is_err());
        assert!(pr_auc(&[0.1], &[true, false]).is_err());
    }

    #[test]
    fn ties_match_permutation_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.random_range(2..8);
            let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..3) as f64).collect();
            let mut labels: Vec<bool> = (0..n).map(|_| rng.random()).collect();
            labels[0] = true;
            labels[1] = false;
            let a = pr_auc(&scores, &labels).unwrap();
            let b = permutation_oracle(&scores, &labels);
            assert!((a - b).abs() < 1e-12, "{scores:?} {labels:?}: {a} vs {b}");
        }
    }

    #[test]
    fn all_tied_hand_value() {
        // g = 5, p = 2: (1/p) sum_j (p/g)(1 + (j-1)/4)/j = (3 H_5 + 5) / 20
        let labels = [true, false, false, true, false];
        let h5 = 1.0 + 1.0 / 2.0 + 1.0 / 3.0 + 1.0 / 4.0 + 1.0 / 5.0;
        assert!((pr_auc(&[1.0; 5], &labels).unwrap() - (3.0 * h5 + 5.0) / 20.0).abs() < 1e-12);
    }
}
