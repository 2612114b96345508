//! Synthetic retail-like regression data with planted feature outliers.
//!
//! Each feature `x_j` is an affine image of a latent `u_j`. Bulk rows draw
//! `u_j ~ U(0, 1)`; an outlier row has one or two latents pushed to
//! `0.5 + 0.5 * U(6, 10)`, i.e. 6 to 10 bulk interquartile ranges above the
//! bulk median, well past the 4-IQR band. The target is
//!
//! ```text
//! sales = 1000 * (10 + sum_j w_j * h_{j mod 4}(u_j) + 3 * u_0 * u_1 + noise_std * z)
//! w_j   = 6 * 0.7^j
//! h_0(u) = u
//! h_1(u) = ln(1 + e^{4(u - 0.5)}) / 2
//! h_2(u) = u + 0.8 * sin(2 pi u) / (2 pi)
//! h_3(u) = (e^u - 1) / (e - 1)
//! ```
//!
//! with `z ~ N(0, 1)`. Every `h` is smooth and strictly increasing, so the
//! ground-truth trend of every feature is positive. A `year` column is
//! appended after the features; rows are laid out in equal consecutive
//! year blocks so the data can be split chronologically.

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::rng::{self, Domain};
use crate::{Error, Result};

const FEATURE_SCALES: [f64; 5] = [1000.0, 250.0, 40.0, 5000.0, 120.0];
const TARGET_SCALE: f64 = 1000.0;
const TARGET_BASE: f64 = 10.0;
const INTERACTION: f64 = 3.0;
/// Outlier distance from the bulk median in bulk IQRs.
const OUTLIER_IQRS: (f64, f64) = (6.0, 10.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub n_features: usize,
    pub n_rows: usize,
    pub outlier_fraction: f64,
    pub noise_std: f64,
    pub first_year: i32,
    pub n_years: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_features: 10,
            n_rows: 5000,
            outlier_fraction: 0.05,
            noise_std: 0.2,
            first_year: 2010,
            n_years: 6,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.to_string()));
        if self.n_features < 2 {
            return bad("n_features must be at least 2");
        }
        if self.n_rows < 100 {
            return bad("n_rows must be at least 100");
        }
        if !(0.0..=0.2).contains(&self.outlier_fraction) {
            return bad("outlier_fraction must lie in [0, 0.2]");
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return bad("noise_std must be finite and non-negative");
        }
        if self.n_years == 0 || self.n_years > self.n_rows {
            return bad("n_years must lie in [1, n_rows]");
        }
        Ok(())
    }

    pub fn outlier_count(&self) -> usize {
        (self.outlier_fraction * self.n_rows as f64).floor() as usize
    }

    pub fn feature_weight(j: usize) -> f64 {
        6.0 * 0.7f64.powi(j as i32)
    }
}

fn shape(j: usize, u: f64) -> f64 {
    match j % 4 {
        0 => u,
        1 => (1.0 + (4.0 * (u - 0.5)).exp()).ln() / 2.0,
        2 => {
            let tau = std::f64::consts::TAU;
            u + 0.8 * (tau * u).sin() / tau
        }
        _ => (u.exp() - 1.0) / (std::f64::consts::E - 1.0),
    }
}

/// Noise-free target for the given latents.
fn latent_response(latent: &[f64]) -> f64 {
    let additive: f64 = latent
        .iter()
        .enumerate()
        .map(|(j, &u)| SyntheticSpec::feature_weight(j) * shape(j, u))
        .sum();
    TARGET_SCALE * (TARGET_BASE + additive + INTERACTION * latent[0] * latent[1])
}

fn feature_value(j: usize, u: f64) -> f64 {
    let scale = FEATURE_SCALES[j % FEATURE_SCALES.len()];
    scale * (1.0 + u)
}

#[derive(Clone, Debug)]
pub struct SyntheticDataset {
    pub dataset: Dataset,
    /// Ids of the rows that received planted outlier values, ascending.
    pub outlier_row_ids: Vec<u64>,
}

/// Pure function of `(spec, seed)`.
pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<SyntheticDataset> {
    spec.validate()?;
    let (n, d) = (spec.n_rows, spec.n_features);
    let mut rng = rng::stream(seed, Domain::Synthetic, 0, 0);

    let mut latent: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect();

    let mut outliers = index::sample(&mut rng, n, spec.outlier_count()).into_vec();
    outliers.sort_unstable();
    for &i in &outliers {
        let pushed = if d > 1 && rng.random_bool(0.5) { 2 } else { 1 };
        for j in index::sample(&mut rng, d, pushed) {
            let iqrs = rng.random_range(OUTLIER_IQRS.0..OUTLIER_IQRS.1);
            latent[i][j] = 0.5 + 0.5 * iqrs;
        }
    }

    let mut rows = Vec::with_capacity(n);
    let mut target = Vec::with_capacity(n);
    for (i, u) in latent.iter().enumerate() {
        let z: f64 = rng.sample(StandardNormal);
        target.push(latent_response(u) + TARGET_SCALE * spec.noise_std * z);
        let year = spec.first_year + (i * spec.n_years / n) as i32;
        let mut row: Vec<f64> = u.iter().enumerate().map(|(j, &v)| feature_value(j, v)).collect();
        row.push(f64::from(year));
        rows.push(row);
    }

    let mut names: Vec<String> = (0..d).map(|j| format!("x{j}")).collect();
    names.push("year".into());
    let dataset = Dataset::new(names, "sales", rows, target, (0..n as u64).collect())?;
    Ok(SyntheticDataset {
        dataset,
        outlier_row_ids: outliers.into_iter().map(|i| i as u64).collect(),
    })
}
