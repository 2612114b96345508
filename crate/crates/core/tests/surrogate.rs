use mcbrp_core::surrogate::{local_importance, rank_frequency};
use mcbrp_core::{Dataset, FnPredictor, SurrogateParams};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random linear black box over `d` features whose per-std slopes grow by
/// a factor of at least two from one rank to the next, plus a background
/// with unequal feature scales. Returns the features in true importance
/// order with their signs.
fn linear_case(rng: &mut ChaCha8Rng, d: usize) -> (Vec<f64>, Dataset, Vec<(usize, f64)>) {
    let scales: Vec<f64> = (0..d).map(|_| rng.random_range(0.5..50.0)).collect();
    let rows: Vec<Vec<f64>> = (0..300)
        .map(|_| scales.iter().map(|s| s * rng.random_range(-1.0..1.0)).collect())
        .collect();
    let names = (0..d).map(|j| format!("x{j}")).collect();
    let ids = (0..300).collect();
    let target = vec![0.0; 300];
    let background = Dataset::new(names, "t", rows, target, ids).unwrap();
    let sigma: Vec<f64> = (0..d)
        .map(|j| {
            let col = background.column(j);
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (col.len() - 1) as f64).sqrt()
        })
        .collect();

    let mut order: Vec<usize> = (0..d).collect();
    order.shuffle(rng);
    let mut magnitude = rng.random_range(0.5..2.0);
    let mut coef = vec![0.0; d];
    let mut truth = Vec::new();
    for &j in order.iter().rev() {
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        coef[j] = sign * magnitude / sigma[j];
        magnitude *= rng.random_range(2.0..4.0);
        truth.push((j, sign));
    }
    truth.reverse();
    (coef, background, truth)
}

#[test]
fn recovers_order_and_signs_of_linear_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..5 {
        let d = rng.random_range(3..7);
        let (coef, background, truth) = linear_case(&mut rng, d);
        let x = background.row(0).to_vec();
        let f = FnPredictor::new(d, move |r: &[f64]| r.iter().zip(&coef).map(|(a, b)| a * b).sum());
        for seed in 0..10 {
            let params = SurrogateParams {
                seed,
                ..SurrogateParams::default()
            };
            let ranking = local_importance(&f, 0, &x, &background, d, &params).unwrap();
            let got: Vec<(usize, f64)> = ranking
                .ranked_features
                .iter()
                .map(|r| (r.index, r.weight.signum()))
                .collect();
            assert_eq!(got, truth, "seed {seed}");
            assert!(ranking.surrogate_fit_quality > 0.999_999);
        }
    }
}

#[test]
fn ranking_is_deterministic_in_seed() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (_, background, _) = linear_case(&mut rng, 4);
    let f = FnPredictor::new(4, |r: &[f64]| (r[0] / 10.0).sin() * r[1] + r[2].abs());
    let x = background.row(3).to_vec();
    let params = SurrogateParams::default();
    let a = local_importance(&f, 3, &x, &background, 2, &params).unwrap();
    let b = local_importance(&f, 3, &x, &background, 2, &params).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.ranked_features.len(), 2);
}

#[test]
fn frequencies_are_fractions_of_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (coef, background, _) = linear_case(&mut rng, 4);
    let f = FnPredictor::new(4, move |r: &[f64]| r.iter().zip(&coef).map(|(a, b)| a * b).sum());
    let rankings: Vec<_> = (0..5)
        .map(|i| local_importance(&f, i, background.row(i as usize), &background, 2, &SurrogateParams::default()).unwrap())
        .collect();
    let table = rank_frequency(&rankings, background.feature_names()).unwrap();
    assert_eq!(table.len(), 4);
    assert!((table.iter().map(|t| t.fraction).sum::<f64>() - 2.0).abs() < 1e-12);
    assert!(table.iter().all(|t| t.fraction == 0.0 || t.fraction == 1.0));
}
