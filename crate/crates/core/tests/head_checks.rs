use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use respire_core::footprint::{head_param_count, measure_serialized};
use respire_core::head::{hyperband_schedule, hyperband_search, HeadConfig, HeadModel, HeadShape, HeadSpace};
use respire_core::learn::Matrix;

fn gauss(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Matrix {
    use rand_distr::{Distribution, StandardNormal};
    Matrix::new(n, d, (0..n * d).map(|_| StandardNormal.sample(rng)).collect()).unwrap()
}

/// Largest relative gap between the analytic gradient and central
/// differences of the loss, over every parameter.
fn max_relative_error(model: &mut HeadModel, x: &Matrix, y: &[bool]) -> f64 {
    let (_, analytic) = model.loss_and_gradient(x, y).unwrap();
    let base = model.parameters();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for i in 0..base.len() {
        let mut p = base.clone();
        p[i] = base[i] + h;
        model.set_parameters(&p).unwrap();
        let up = model.loss_and_gradient(x, y).unwrap().0;
        p[i] = base[i] - h;
        model.set_parameters(&p).unwrap();
        let down = model.loss_and_gradient(x, y).unwrap().0;
        let numeric = (up - down) / (2.0 * h);
        let denom = analytic[i].abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    model.set_parameters(&base).unwrap();
    worst
}

#[test]
fn gradient_matches_finite_differences_for_every_depth() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for layers in 1..=5 {
        let x = gauss(12, 5, &mut rng);
        let y: Vec<bool> = (0..12).map(|i| i % 3 == 0).collect();
        let cfg = HeadConfig {
            hidden_layers: layers,
            hidden_units: 8,
            dropout_rate: 0.2,
            input_dim: 5,
            seed: layers as u64,
        };
        let mut m = HeadModel::new(cfg).unwrap();
        let err = max_relative_error(&mut m, &x, &y);
        assert!(err < 1e-4, "L={layers}: {err}");
    }
    assert!(t.elapsed().as_secs() < 30);
}

#[test]
fn serialized_scalars_match_the_count_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let cfg = HeadConfig {
            hidden_layers: rng.random_range(1..=5),
            hidden_units: rng.random_range(1..=64),
            dropout_rate: 0.0,
            input_dim: rng.random_range(1..=300),
            seed: rng.random(),
        };
        let m = HeadModel::new(cfg).unwrap();
        let entry = measure_serialized("head", &m.to_blob());
        assert_eq!(entry.parameter_count, head_param_count(&cfg));
        assert_eq!(m.parameter_count() as u64, head_param_count(&cfg));
    }
}

#[test]
fn schedule_for_27_and_3() {
    let s = hyperband_schedule(27, 3).unwrap();
    let first: Vec<(usize, usize)> = s.iter().map(|b| b.rungs[0]).collect();
    assert_eq!(first, vec![(27, 1), (12, 3), (6, 9), (4, 27)]);
    assert_eq!(s[0].rungs, vec![(27, 1), (9, 3), (3, 9), (1, 27)]);
    assert_eq!(s[1].rungs, vec![(12, 3), (4, 9), (1, 27)]);
    assert_eq!(s[2].rungs, vec![(6, 9), (2, 27)]);
    assert_eq!(s[3].rungs, vec![(4, 27)]);
}

/// XOR-style labels: a single hidden unit cannot fit them, a wide layer can.
#[test]
fn hyperband_prefers_the_dominant_shape() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 160;
    let x = gauss(n, 2, &mut rng);
    let y: Vec<bool> = (0..n).map(|i| (x.get(i, 0) > 0.0) ^ (x.get(i, 1) > 0.0)).collect();
    let folds: Vec<(Vec<usize>, Vec<usize>)> = (0..2)
        .map(|k| {
            let va: Vec<usize> = (0..n).filter(|i| i % 2 == k).collect();
            let tr: Vec<usize> = (0..n).filter(|i| i % 2 != k).collect();
            (tr, va)
        })
        .collect();
    let space = HeadSpace {
        shapes: vec![
            HeadShape {
                hidden_layers: 1,
                hidden_units: 1,
                dropout_rate: 0.0,
            },
            HeadShape {
                hidden_layers: 2,
                hidden_units: 32,
                dropout_rate: 0.0,
            },
        ],
    };
    let r = hyperband_search(&space, &x, &y, &folds, 27, 3, 5).unwrap();
    assert_eq!(r.best.hidden_units, 32, "{:?} {}", r.best, r.best_score);
    assert!(r.best_score > 0.85, "{}", r.best_score);
    let evaluated: usize = r.trace.iter().map(|t| t.results.len()).sum();
    let planned: usize = hyperband_schedule(27, 3).unwrap().iter().flat_map(|b| b.rungs.iter().map(|r| r.0)).sum();
    assert_eq!(evaluated, planned);
}
