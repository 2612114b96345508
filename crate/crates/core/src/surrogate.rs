//! Local feature importance from a proximity-weighted linear surrogate.
//!
//! Around an instance `x` the black box is probed at Gaussian perturbations
//! `x + sigma * z`, where `sigma` holds the per-feature standard deviations
//! of a background dataset and `z ~ N(0, I)`. Each probe is weighted by
//! `exp(-|z|^2 / width^2)` and a weighted least-squares line is fitted to the
//! black-box outputs in the standardized coordinates `z`. The fitted slope
//! of feature `j` in those coordinates equals `coefficient_j * sigma_j`, the
//! change in prediction per background standard deviation, and features are
//! ranked by its magnitude.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::ensemble::{check_width, Predictor};
use crate::rng::{self, Domain};
use crate::stats::RunningStats;
use crate::{Dataset, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SurrogateParams {
    pub num_samples: usize,
    /// Kernel width in standardized coordinates; `None` means `0.75 * sqrt(d)`.
    pub kernel_width: Option<f64>,
    pub seed: u64,
}

impl Default for SurrogateParams {
    fn default() -> Self {
        Self {
            num_samples: 5000,
            kernel_width: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub index: usize,
    /// Surrogate slope per background standard deviation of the feature.
    pub weight: f64,
}

/// The top-`n` features for one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRanking {
    pub instance_id: u64,
    pub n: usize,
    /// Sorted by `|weight|` descending, ties by ascending index.
    pub ranked_features: Vec<RankedFeature>,
    /// Weighted R^2 of the local linear fit; zero for a constant response.
    pub surrogate_fit_quality: f64,
    /// The black box was constant on every probe.
    pub degenerate: bool,
    /// The weighted normal equations needed a ridge term.
    pub ridge_applied: bool,
    /// Features left out because they are constant in the background.
    pub excluded_features: Vec<usize>,
}

impl ImportanceRanking {
    pub fn feature_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.ranked_features.iter().map(|f| f.index)
    }
}

/// Rank the `n` locally most important features of `x` under `f`.
pub fn local_importance<P: Predictor + ?Sized>(
    f: &P,
    instance_id: u64,
    x: &[f64],
    background: &Dataset,
    n: usize,
    params: &SurrogateParams,
) -> Result<ImportanceRanking> {
    let d = background.n_features();
    if background.is_empty() {
        return Err(Error::EmptyDataset);
    }
    check_width(d, x)?;
    if n == 0 || n > d {
        return Err(Error::InvalidParameter(format!(
            "n must lie in [1, {d}], got {n}"
        )));
    }
    if params.num_samples < 10 * d {
        return Err(Error::InvalidParameter(format!(
            "num_samples must be at least {} for {d} features",
            10 * d
        )));
    }

    let sigma: Vec<f64> = (0..d)
        .map(|j| {
            RunningStats::from_iter(background.rows().iter().map(|r| r[j]))
                .std_dev()
                .unwrap_or(0.0)
        })
        .collect();
    let (active, excluded): (Vec<usize>, Vec<usize>) = (0..d).partition(|&j| sigma[j] > 0.0);
    if active.len() < n {
        return Err(Error::InvalidParameter(format!(
            "only {} features vary in the background, cannot rank {n}",
            active.len()
        )));
    }
    let k = active.len();
    let width = params.kernel_width.unwrap_or(0.75 * (k as f64).sqrt());
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::InvalidParameter("kernel_width must be positive".into()));
    }

    let mut rng = rng::stream(params.seed, Domain::Surrogate, instance_id, 0);
    let mut z = Vec::with_capacity(params.num_samples);
    let mut probes = Vec::with_capacity(params.num_samples);
    for _ in 0..params.num_samples {
        let zs: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut probe = x.to_vec();
        for (&j, &zj) in active.iter().zip(&zs) {
            probe[j] += sigma[j] * zj;
        }
        z.push(zs);
        probes.push(probe);
    }
    let y = f.predict_batch(&probes)?;
    let w: Vec<f64> = z
        .iter()
        .map(|zs| (-zs.iter().map(|v| v * v).sum::<f64>() / (width * width)).exp())
        .collect();

    let mut ranking = ImportanceRanking {
        instance_id,
        n,
        ranked_features: Vec::new(),
        surrogate_fit_quality: 0.0,
        degenerate: false,
        ridge_applied: false,
        excluded_features: excluded,
    };

    let constant = y.iter().all(|&v| v == y[0]);
    let slopes = if constant {
        ranking.degenerate = true;
        vec![0.0; k]
    } else {
        let fit = weighted_least_squares(&z, &y, &w)?;
        ranking.ridge_applied = fit.ridge_applied;
        ranking.surrogate_fit_quality = fit.r_squared;
        fit.coefficients[1..].to_vec()
    };

    let mut ranked: Vec<RankedFeature> = active
        .iter()
        .zip(slopes)
        .map(|(&index, weight)| RankedFeature { index, weight })
        .collect();
    ranked.sort_by(|a, b| {
        b.weight
            .abs()
            .total_cmp(&a.weight.abs())
            .then(a.index.cmp(&b.index))
    });
    ranked.truncate(n);
    ranking.ranked_features = ranked;
    Ok(ranking)
}

struct LinearFit {
    /// Intercept first.
    coefficients: Vec<f64>,
    r_squared: f64,
    ridge_applied: bool,
}

fn weighted_least_squares(design: &[Vec<f64>], y: &[f64], w: &[f64]) -> Result<LinearFit> {
    let p = design.first().map_or(0, Vec::len) + 1;
    let mut gram = DMatrix::<f64>::zeros(p, p);
    let mut rhs = DVector::<f64>::zeros(p);
    let mut row = vec![0.0; p];
    for ((zs, &yi), &wi) in design.iter().zip(y).zip(w) {
        row[0] = 1.0;
        row[1..].copy_from_slice(zs);
        for a in 0..p {
            let wa = wi * row[a];
            rhs[a] += wa * yi;
            for b in a..p {
                gram[(a, b)] += wa * row[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            gram[(a, b)] = gram[(b, a)];
        }
    }

    let mut ridge_applied = false;
    let solution = match gram.clone().cholesky() {
        Some(c) => c.solve(&rhs),
        None => {
            ridge_applied = true;
            let scale = gram.diagonal().max().max(1.0);
            let mut ridged = gram;
            for a in 1..p {
                ridged[(a, a)] += 1e-8 * scale;
            }
            ridged
                .cholesky()
                .ok_or_else(|| Error::Predictor("weighted design matrix is singular".into()))?
                .solve(&rhs)
        }
    };
    let coefficients: Vec<f64> = solution.iter().copied().collect();

    let w_sum: f64 = w.iter().sum();
    let y_mean = y.iter().zip(w).map(|(yi, wi)| yi * wi).sum::<f64>() / w_sum;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for ((zs, &yi), &wi) in design.iter().zip(y).zip(w) {
        let fitted = coefficients[0]
            + coefficients[1..]
                .iter()
                .zip(zs)
                .map(|(c, v)| c * v)
                .sum::<f64>();
        ss_res += wi * (yi - fitted).powi(2);
        ss_tot += wi * (yi - y_mean).powi(2);
    }
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(LinearFit {
        coefficients,
        r_squared,
        ridge_applied,
    })
}

/// Share of rankings in which a feature appears among the top `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureFrequency {
    pub feature: String,
    pub fraction: f64,
}

/// Per-feature fraction of `rankings` that include it, in feature order.
pub fn rank_frequency(
    rankings: &[ImportanceRanking],
    feature_names: &[String],
) -> Result<Vec<FeatureFrequency>> {
    if rankings.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut counts = vec![0usize; feature_names.len()];
    for ranking in rankings {
        for j in ranking.feature_indices() {
            let slot = counts.get_mut(j).ok_or(Error::DimensionMismatch {
                expected: feature_names.len(),
                got: j + 1,
            })?;
            *slot += 1;
        }
    }
    Ok(feature_names
        .iter()
        .zip(counts)
        .map(|(name, c)| FeatureFrequency {
            feature: name.clone(),
            fraction: c as f64 / rankings.len() as f64,
        })
        .collect())
}
