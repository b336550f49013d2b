use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;

use super::HarnessError;
use crate::rng::{label, rng_for};

pub const DEFAULT_FOLDS: usize = 5;

/// User-grouped outer folds, plus inner folds over each development set.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    /// user -> outer fold.
    pub outer: BTreeMap<String, usize>,
    /// Per outer fold: development user -> inner fold.
    pub inner: Vec<BTreeMap<String, usize>>,
}

/// Seeded shuffle, then round-robin into `k` groups.
fn round_robin(users: &[String], k: usize, seed: u64, stream: &[u64]) -> BTreeMap<String, usize> {
    let mut order = users.to_vec();
    order.sort();
    order.shuffle(&mut rng_for(seed, stream));
    order.into_iter().enumerate().map(|(i, u)| (u, i % k)).collect()
}

/// Outer folds only.
pub fn user_grouped_folds(users: &BTreeSet<String>, k: usize, seed: u64) -> Result<BTreeMap<String, usize>, HarnessError> {
    if k < 2 || users.len() < k {
        return Err(HarnessError::TooFewUsers { users: users.len(), k });
    }
    let v: Vec<String> = users.iter().cloned().collect();
    Ok(round_robin(&v, k, seed, &[label("outer-folds")]))
}

impl FoldPlan {
    pub fn new(users: &BTreeSet<String>, k: usize, seed: u64) -> Result<Self, HarnessError> {
        let outer = user_grouped_folds(users, k, seed)?;
        let mut inner = Vec::with_capacity(k);
        for f in 0..k {
            let dev: Vec<String> = outer.iter().filter(|(_, &o)| o != f).map(|(u, _)| u.clone()).collect();
            if dev.len() < k {
                return Err(HarnessError::TooFewUsers { users: dev.len(), k });
            }
            inner.push(round_robin(&dev, k, seed, &[label("inner-folds"), f as u64]));
        }
        Ok(Self { k, seed, outer, inner })
    }

    pub fn test_users(&self, fold: usize) -> BTreeSet<&str> {
        self.outer.iter().filter(|(_, &f)| f == fold).map(|(u, _)| u.as_str()).collect()
    }

    pub fn dev_users(&self, fold: usize) -> BTreeSet<&str> {
        self.outer.iter().filter(|(_, &f)| f != fold).map(|(u, _)| u.as_str()).collect()
    }

    /// `(train, validation)` users of inner fold `j` inside outer fold `fold`.
    pub fn inner_split(&self, fold: usize, j: usize) -> (BTreeSet<&str>, BTreeSet<&str>) {
        let mut tr = BTreeSet::new();
        let mut va = BTreeSet::new();
        for (u, &g) in &self.inner[fold] {
            if g == j {
                va.insert(u.as_str());
            } else {
                tr.insert(u.as_str());
            }
        }
        (tr, va)
    }

    /// Count of structural violations: users in several outer folds (impossible
    /// by construction of the map, so checked as fold coverage), dev/test
    /// overlap, and inner folds that fail to partition the dev users.
    pub fn violations(&self) -> usize {
        let mut bad = 0;
        let all: BTreeSet<&str> = self.outer.keys().map(String::as_str).collect();
        let mut seen = BTreeSet::new();
        for f in 0..self.k {
            let test = self.test_users(f);
            let dev = self.dev_users(f);
            bad += test.intersection(&dev).count();
            for u in &test {
                if !seen.insert(*u) {
                    bad += 1;
                }
            }
            let inner_users: BTreeSet<&str> = self.inner[f].keys().map(String::as_str).collect();
            if inner_users != dev {
                bad += 1;
            }
            let mut covered = BTreeSet::new();
            for j in 0..self.k {
                let (tr, va) = self.inner_split(f, j);
                bad += tr.intersection(&va).count();
                for u in va {
                    if !covered.insert(u) {
                        bad += 1;
                    }
                }
            }
            if covered != dev {
                bad += 1;
            }
        }
        if seen != all {
            bad += 1;
        }
        bad
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn users(n: usize) -> BTreeSet<String> {
        (0..n).map(|i| format!("user{i:03}")).collect()
    }

    fn sizes(m: &BTreeMap<String, usize>, k: usize) -> Vec<usize> {
        let mut s = vec![0; k];
        m.values().for_each(|&f| s[f] += 1);
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }

    #[test]
    fn even_and_remainder_splits() {
        assert_eq!(sizes(&user_grouped_folds(&users(10), 5, 0).unwrap(), 5), vec![2; 5]);
        assert_eq!(sizes(&user_grouped_folds(&users(7), 5, 0).unwrap(), 5), vec![2, 2, 1, 1, 1]);
        assert!(matches!(
            user_grouped_folds(&users(4), 5, 0),
            Err(HarnessError::TooFewUsers { users: 4, k: 5 })
        ));
    }

    #[test]
    fn plans_have_no_violations() {
        for seed in 0..20 {
            let p = FoldPlan::new(&users(23), 5, seed).unwrap();
            assert_eq!(p.violations(), 0);
            for f in 0..5 {
                let s = sizes(&p.inner[f], 5);
                assert!(s[0] - s[4] <= 1);
            }
        }
        // 6 users leave dev sets of 4 or 5, too few for 5 inner folds
        assert!(FoldPlan::new(&users(6), 5, 0).is_err());
    }

    #[test]
    fn seed_changes_assignment() {
        let a = FoldPlan::new(&users(30), 5, 1).unwrap();
        assert_eq!(a, FoldPlan::new(&users(30), 5, 1).unwrap());
        assert_ne!(a.outer, FoldPlan::new(&users(30), 5, 2).unwrap().outer);
    }
}
