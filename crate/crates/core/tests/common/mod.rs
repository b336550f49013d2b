#![allow(dead_code)]

use rayon::prelude::*;
use respire_core::features::extract_handcrafted;
use respire_core::harness::{build_dataset, CombineMode, Dataset, FeatureTable, Manifest, ModalitySel};
use respire_core::synthetic::{cohort, CohortSpec};
use respire_core::FeatureKind;

/// Hand-crafted features of the standard synthetic cohort, built in memory.
pub fn synthetic_handcrafted(seed: u64) -> (Manifest, FeatureTable) {
    let clips = cohort(&CohortSpec::standard(seed));
    let rows: Vec<(String, Vec<f64>)> = clips
        .par_iter()
        .map(|c| (c.row.sample_id.clone(), extract_handcrafted(&c.clip).unwrap().into_values()))
        .collect();
    let manifest = Manifest {
        rows: clips.into_iter().map(|c| c.row).collect(),
    };
    (manifest, FeatureTable::from_rows(rows, FeatureKind::Handcrafted).unwrap())
}

pub fn cough_dataset(seed: u64) -> Dataset {
    let (m, t) = synthetic_handcrafted(seed);
    build_dataset(&m, &t, ModalitySel::C, CombineMode::default()).unwrap()
}

/// Null labels: within each original class, a random half of the users
/// become positive, so the new labels carry no information about the band
/// the features encode. A plain permutation of 50 users keeps a chance
/// correlation with the true class that the learners pick up.
pub fn shuffle_user_labels(data: &Dataset, seed: u64) -> Dataset {
    use rand::seq::SliceRandom;
    let users: Vec<String> = data.user_set().into_iter().collect();
    let truth: Vec<bool> = users
        .iter()
        .map(|u| data.labels[data.users.iter().position(|v| v == u).unwrap()])
        .collect();
    let mut rng = respire_core::rng::rng_for(seed, &[7]);
    let mut null = vec![false; users.len()];
    let mut extra = false;
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..users.len()).filter(|&i| truth[i] == class).collect();
        idx.shuffle(&mut rng);
        let half = idx.len() / 2 + usize::from(extra && idx.len() % 2 == 1);
        extra ^= idx.len() % 2 == 1;
        for &i in &idx[..half] {
            null[i] = true;
        }
    }
    let labels = data
        .users
        .iter()
        .map(|u| null[users.binary_search(u).unwrap()])
        .collect();
    data.with_labels(labels)
}
