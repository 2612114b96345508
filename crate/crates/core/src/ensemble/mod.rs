//! The black-box regressor: a predictor contract and a gradient-boosted
//! regression-tree implementation of it.

mod gbr;
mod tree;

use crate::{Dataset, Error, Result};

pub use gbr::{GbrModel, GbrParams};
pub use tree::{Node, RegressionTree};

/// A pure function from a feature vector to a prediction.
///
/// Implementations must be deterministic and safe to call from many threads
/// at once; the Monte Carlo simulation shares one predictor across workers.
pub trait Predictor: Sync {
    fn n_features(&self) -> usize;

    fn predict(&self, row: &[f64]) -> Result<f64>;

    fn predict_batch(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        rows.iter().map(|r| self.predict(r)).collect()
    }
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn n_features(&self) -> usize {
        (**self).n_features()
    }

    fn predict(&self, row: &[f64]) -> Result<f64> {
        (**self).predict(row)
    }

    fn predict_batch(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        (**self).predict_batch(rows)
    }
}

pub(crate) fn check_width(expected: usize, row: &[f64]) -> Result<()> {
    if row.len() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected,
            got: row.len(),
        })
    }
}

/// Adapts a closure into a [`Predictor`].
pub struct FnPredictor<F> {
    n_features: usize,
    f: F,
}

impl<F> FnPredictor<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    pub fn new(n_features: usize, f: F) -> Self {
        Self { n_features, f }
    }
}

impl<F> Predictor for FnPredictor<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict(&self, row: &[f64]) -> Result<f64> {
        check_width(self.n_features, row)?;
        Ok((self.f)(row))
    }
}

/// Coefficient of determination `1 - SS_res / SS_tot` of `model` on `ds`.
pub fn r_squared<P: Predictor + ?Sized>(model: &P, ds: &Dataset) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let predictions = model.predict_batch(ds.rows())?;
    r_squared_from(ds.target(), &predictions)
}

pub(crate) fn r_squared_from(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: actual.len(),
            right: predicted.len(),
        });
    }
    let mean = crate::stats::RunningStats::from_iter(actual.iter().copied())
        .mean()
        .ok_or(Error::EmptyInput)?;
    let ss_tot: f64 = actual.iter().map(|t| (t - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let ss_res: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(t, p)| (t - p).powi(2))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}
