use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::FeatureFences;
use crate::ensemble::{check_width, Predictor};
use crate::rng::{Domain, UniformStream};
use crate::surrogate::ImportanceRanking;
use crate::{Error, Result};

const CHUNK: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSample {
    pub value: f64,
    pub prediction: f64,
    pub accepted: bool,
}

/// All perturbations of one feature, in draw order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureStratum {
    pub feature: usize,
    pub fences: FeatureFences,
    pub samples: Vec<SimulationSample>,
    /// No draws were made because the fences have zero width.
    pub skipped: bool,
}

impl FeatureStratum {
    /// Accepted `(value, prediction)` pairs.
    pub fn accepted(&self) -> Vec<(f64, f64)> {
        self.samples
            .iter()
            .filter(|s| s.accepted)
            .map(|s| (s.value, s.prediction))
            .collect()
    }

    pub fn accepted_count(&self) -> usize {
        self.samples.iter().filter(|s| s.accepted).count()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub instance_id: u64,
    pub actual: f64,
    pub epsilon_large: f64,
    /// One stratum per ranked feature, in ranking order.
    pub strata: Vec<FeatureStratum>,
}

impl SimulationResult {
    pub fn accepted_counts(&self) -> Vec<usize> {
        self.strata.iter().map(FeatureStratum::accepted_count).collect()
    }
}

/// Perturb each ranked feature of `instance` `m` times, uniformly within its
/// fences, and accept draws whose prediction is strictly within
/// `epsilon_large` of `actual`.
///
/// Draw `i` of feature `j` comes from the counter-based stream
/// `(seed, instance_id, j)` at position `i`, so the result does not depend
/// on how the rayon pool schedules the work.
#[allow(clippy::too_many_arguments)]
pub fn simulate<P: Predictor + ?Sized>(
    f: &P,
    instance_id: u64,
    instance: &[f64],
    actual: f64,
    phi: &ImportanceRanking,
    epsilon_large: f64,
    fences: &[FeatureFences],
    m: usize,
    seed: u64,
) -> Result<SimulationResult> {
    check_width(f.n_features(), instance)?;
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let features: Vec<FeatureFences> = phi
        .feature_indices()
        .map(|j| {
            fences
                .iter()
                .find(|fe| fe.feature == j)
                .copied()
                .ok_or_else(|| Error::InvalidParameter(format!("no fences for feature {j}")))
        })
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize)> = features
        .iter()
        .enumerate()
        .filter(|(_, fe)| !fe.is_zero_width())
        .flat_map(|(k, _)| (0..m).step_by(CHUNK).map(move |start| (k, start)))
        .collect();

    let chunks: Vec<(usize, Vec<SimulationSample>)> = jobs
        .into_par_iter()
        .map(|(k, start)| {
            let fe = features[k];
            let end = (start + CHUNK).min(m);
            let mut draws = UniformStream::new(seed, Domain::Simulation, instance_id, fe.feature as u64);
            draws.seek(start as u64);
            let values: Vec<f64> = (start..end).map(|_| draws.next_in(fe.lower, fe.upper)).collect();
            let rows: Vec<Vec<f64>> = values
                .iter()
                .map(|&v| {
                    let mut row = instance.to_vec();
                    row[fe.feature] = v;
                    row
                })
                .collect();
            let predictions = f.predict_batch(&rows)?;
            let samples = values
                .into_iter()
                .zip(predictions)
                .map(|(value, prediction)| SimulationSample {
                    value,
                    prediction,
                    accepted: (prediction - actual).abs() < epsilon_large,
                })
                .collect();
            Ok((k, samples))
        })
        .collect::<Result<_>>()?;

    let mut strata: Vec<FeatureStratum> = features
        .iter()
        .map(|&fe| FeatureStratum {
            feature: fe.feature,
            fences: fe,
            samples: Vec::new(),
            skipped: fe.is_zero_width(),
        })
        .collect();
    for (k, samples) in chunks {
        strata[k].samples.extend(samples);
    }
    Ok(SimulationResult {
        instance_id,
        actual,
        epsilon_large,
        strata,
    })
}
