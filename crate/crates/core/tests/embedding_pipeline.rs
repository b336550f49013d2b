use respire_core::embedding::{all_backbone_names, pool, read_embedding_file, validate_config};
use respire_core::harness::{
    build_dataset, nested_cv, nested_cv_head, CombineMode, CvOptions, FeatureTable, HeadCvOptions, Manifest, ModalitySel,
};
use respire_core::head::HeadSpace;
use respire_core::learn::Algorithm;
use respire_core::synthetic::{cohort, synthetic_embedding, write_embeddings, CohortSpec};
use respire_core::FeatureKind;

fn manifest(seed: u64) -> Manifest {
    let spec = CohortSpec {
        seconds: 0.05,
        ..CohortSpec::standard(seed)
    };
    Manifest {
        rows: cohort(&spec).into_iter().map(|c| c.row).collect(),
    }
}

fn pooled_table(m: &Manifest, backbone: &str, shift: f64) -> FeatureTable {
    let rows = m
        .rows
        .iter()
        .map(|r| {
            let set = synthetic_embedding(&r.sample_id, backbone, 4, r.label, shift, 3).unwrap();
            (r.sample_id.clone(), pool(&set).unwrap().values)
        })
        .collect();
    FeatureTable::from_rows(rows, FeatureKind::PooledEmbedding).unwrap()
}

#[test]
fn emb1_files_round_trip_for_every_backbone() {
    let dir = tempfile::tempdir().unwrap();
    let m = Manifest {
        rows: manifest(1).rows.into_iter().take(2).collect(),
    };
    for name in all_backbone_names() {
        let sub = dir.path().join(name.replace(' ', "_"));
        write_embeddings(&m, &name, 3, 0.5, 1, &sub).unwrap();
        let set = read_embedding_file(sub.join(format!("{}.emb1", m.rows[0].sample_id))).unwrap();
        let dim = validate_config(&name).unwrap().embedding_dim;
        assert_eq!((set.n_windows(), set.dim()), (3, dim));
        assert_eq!(set, synthetic_embedding(&m.rows[0].sample_id, &name, 3, m.rows[0].label, 0.5, 1).unwrap());
        assert_eq!(pool(&set).unwrap().len(), 2 * dim);
    }
}

#[test]
fn head_nested_cv_on_pooled_embeddings() {
    let m = manifest(2);
    let t = pooled_table(&m, "VGGISH", 1.5);
    let data = build_dataset(&m, &t, ModalitySel::B, CombineMode::default()).unwrap();
    assert_eq!(data.x.cols(), 256);
    let opts = HeadCvOptions {
        cv: CvOptions::new(4),
        space: HeadSpace::grid(&[1, 2], &[16, 32], &[0.0, 0.2]),
        r_max: 9,
        eta: 3,
    };
    let out = nested_cv_head(&data, &opts).unwrap();
    assert_eq!(out.folds.len(), 5);
    assert!(out.mean_pr_auc > 0.9, "{}", out.mean_pr_auc);
    assert_eq!(nested_cv_head(&data, &opts).unwrap(), out);
}

#[test]
fn shallow_learner_on_concatenated_pairs() {
    let m = manifest(3);
    let t = pooled_table(&m, "VGGISH", 1.0);
    let data = build_dataset(&m, &t, ModalitySel::CB, CombineMode::Concatenate).unwrap();
    assert_eq!((data.len(), data.x.cols()), (100, 512));
    let out = nested_cv(&data, Algorithm::Lr, &CvOptions::new(1)).unwrap();
    assert!(out.mean_pr_auc > 0.9, "{}", out.mean_pr_auc);
}
