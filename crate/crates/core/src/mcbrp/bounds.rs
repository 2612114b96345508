use serde::{Deserialize, Serialize};

use crate::stats::{RunningCovariance, RunningStats};
use crate::{Error, Result};

/// `[mean - sd, mean + sd]` of a feature's accepted values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReasonableBounds {
    pub low: f64,
    pub high: f64,
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator).
    pub std_dev: f64,
    pub zero_width: bool,
}

impl ReasonableBounds {
    pub fn contains(&self, v: f64) -> bool {
        self.low <= v && v <= self.high
    }
}

/// Bounds over the accepted `(value, prediction)` pairs of one stratum.
pub fn compute_bounds(stratum: &[(f64, f64)], min_stratum: usize) -> Result<ReasonableBounds> {
    if stratum.is_empty() || stratum.len() < min_stratum {
        return Err(Error::InsufficientStratum {
            accepted: stratum.len(),
            required: min_stratum.max(1),
        });
    }
    let stats: RunningStats = stratum.iter().map(|&(v, _)| v).collect();
    let mean = stats.mean().ok_or(Error::EmptyInput)?;
    let std_dev = stats.std_dev().ok_or(Error::EmptyInput)?;
    Ok(ReasonableBounds {
        low: mean - std_dev,
        high: mean + std_dev,
        mean,
        std_dev,
        zero_width: std_dev == 0.0,
    })
}

/// Pearson correlation between accepted values and their predictions;
/// `None` when either side is constant or fewer than two pairs exist.
pub fn compute_trend(stratum: &[(f64, f64)]) -> Option<f64> {
    stratum.iter().copied().collect::<RunningCovariance>().pearson()
}
