use mcbrp_core::dataset::generate_synthetic;
use mcbrp_core::ensemble::r_squared;
use mcbrp_core::{Dataset, GbrModel, GbrParams, Predictor, SyntheticSpec};
use rayon::prelude::*;

fn synthetic(n_rows: usize, seed: u64) -> Dataset {
    let spec = SyntheticSpec {
        n_rows,
        ..SyntheticSpec::default()
    };
    generate_synthetic(&spec, seed).unwrap().dataset
}

#[test]
fn training_loss_never_increases() {
    let ds = synthetic(1000, 4);
    let model = GbrModel::fit(&ds, &GbrParams::default()).unwrap();
    let mse = model.staged_mse(&ds).unwrap();
    assert_eq!(mse.len(), 101);
    for w in mse.windows(2) {
        assert!(w[1] <= w[0], "loss rose from {} to {}", w[0], w[1]);
    }
    assert!(mse[100] < mse[0] / 10.0);
}

#[test]
fn one_stump_hand_trace() {
    let ds = Dataset::new(
        vec!["x".into()],
        "y",
        vec![vec![0.0], vec![1.0], vec![0.0], vec![1.0]],
        vec![0.0, 10.0, 0.0, 10.0],
        vec![0, 1, 2, 3],
    )
    .unwrap();
    let params = GbrParams {
        n_trees: 1,
        max_depth: 1,
        learning_rate: 1.0,
        ..GbrParams::default()
    };
    let model = GbrModel::fit(&ds, &params).unwrap();
    // Mean 5, split at 0.5, leaves -5 and +5.
    assert_eq!(model.init_value(), 5.0);
    assert_eq!(model.predict(&[0.0]).unwrap(), 0.0);
    assert_eq!(model.predict(&[1.0]).unwrap(), 10.0);
    assert_eq!(model.predict(&[0.5]).unwrap(), 0.0);
    assert_eq!(model.predict(&[0.6]).unwrap(), 10.0);
}

#[test]
fn json_round_trip_predicts_identically() {
    let ds = synthetic(600, 1);
    let model = GbrModel::fit(&ds, &GbrParams::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    model.save(&path).unwrap();
    let back = GbrModel::load(&path).unwrap();
    for row in ds.rows() {
        let a = model.predict(row).unwrap();
        let b = back.predict(row).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
    assert_eq!(model.to_json().unwrap(), back.to_json().unwrap());
}

#[test]
fn concurrent_prediction_equals_serial() {
    let ds = synthetic(800, 2);
    let model = GbrModel::fit(&ds, &GbrParams::default()).unwrap();
    let serial = model.predict_batch(ds.rows()).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let parallel: Vec<f64> = pool.install(|| {
        ds.rows()
            .par_iter()
            .map(|r| model.predict(r).unwrap())
            .collect()
    });
    assert_eq!(serial, parallel);
}

#[test]
fn fits_the_bulk_well() {
    let spec = SyntheticSpec {
        outlier_fraction: 0.0,
        ..SyntheticSpec::default()
    };
    let data = generate_synthetic(&spec, 5).unwrap().dataset;
    let train = data.select(&(0..4000).collect::<Vec<_>>()).unwrap();
    let test = data.select(&(4000..5000).collect::<Vec<_>>()).unwrap();
    let model = GbrModel::fit(&train, &GbrParams::default()).unwrap();
    assert!(r_squared(&model, &test).unwrap() > 0.9);
}

#[test]
fn fitting_is_deterministic() {
    let ds = synthetic(500, 6);
    let a = GbrModel::fit(&ds, &GbrParams::default()).unwrap();
    let b = GbrModel::fit(&ds, &GbrParams::default()).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}
