mod common;

use std::collections::BTreeSet;

use common::naive_quantile;
use mcbrp_core::{classify_errors, quantile};
use proptest::prelude::*;

fn errors_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..200).prop_flat_map(|len| {
        (
            prop::collection::vec(-1e6f64..1e6, len),
            prop::collection::vec(-1e6f64..1e6, len),
        )
    })
}

proptest! {
    #[test]
    fn partition_covers_and_is_disjoint((actual, predicted) in errors_strategy()) {
        let ids: Vec<u64> = (0..actual.len() as u64).collect();
        let tax = classify_errors(&ids, &actual, &predicted).unwrap();
        prop_assert_eq!(tax.reasonable_ids.len() + tax.large_ids.len(), ids.len());
        prop_assert!(tax.reasonable_ids.is_disjoint(&tax.large_ids));
        for (i, &id) in ids.iter().enumerate() {
            let eps = (actual[i] - predicted[i]).abs();
            prop_assert_eq!(tax.errors[i], eps);
            prop_assert_eq!(tax.large_ids.contains(&id), eps > tax.epsilon_large);
        }
        prop_assert_eq!(tax.epsilon_large, tax.q3 + 1.5 * (tax.q3 - tax.q1));
    }

    #[test]
    fn matches_brute_force_reference((actual, predicted) in errors_strategy()) {
        let ids: Vec<u64> = (0..actual.len() as u64).collect();
        let tax = classify_errors(&ids, &actual, &predicted).unwrap();
        let eps: Vec<f64> = actual.iter().zip(&predicted).map(|(a, p)| (a - p).abs()).collect();
        let q1 = naive_quantile(&eps, 0.25);
        let q3 = naive_quantile(&eps, 0.75);
        let threshold = q3 + 1.5 * (q3 - q1);
        prop_assert_eq!(tax.q1, q1);
        prop_assert_eq!(tax.q3, q3);
        prop_assert_eq!(tax.epsilon_large, threshold);
        let expected: BTreeSet<u64> = ids.iter().copied().filter(|&i| eps[i as usize] > threshold).collect();
        prop_assert_eq!(&tax.large_ids, &expected);
    }

    #[test]
    fn scaling_errors_preserves_membership(
        (actual, predicted) in errors_strategy(),
        exp in -3i32..4,
    ) {
        // Powers of two scale every error exactly.
        let c = 2f64.powi(exp);
        let ids: Vec<u64> = (0..actual.len() as u64).collect();
        let base = classify_errors(&ids, &actual, &predicted).unwrap();
        let sa: Vec<f64> = actual.iter().map(|a| a * c).collect();
        let sp: Vec<f64> = predicted.iter().map(|p| p * c).collect();
        let scaled = classify_errors(&ids, &sa, &sp).unwrap();
        prop_assert_eq!(scaled.epsilon_large, base.epsilon_large * c);
        prop_assert_eq!(&scaled.large_ids, &base.large_ids);
    }

    #[test]
    fn quantile_lies_between_extremes(values in prop::collection::vec(-1e9f64..1e9, 1..100), q in 0.0f64..=1.0) {
        let v = quantile(&values, q).unwrap();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo <= v && v <= hi);
    }
}
