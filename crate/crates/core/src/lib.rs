//! Contrastive explanations for large regression errors.
//!
//! The crate trains a gradient-boosted regression-tree ensemble on tabular
//! data, separates test predictions into reasonable ones and large errors
//! using Tukey's fences on the absolute-error distribution, and explains
//! each large error with Monte Carlo perturbation: for every locally
//! important feature it reports the range of values that would have led to
//! a reasonable prediction and the direction in which the prediction moves.
//!
//! Module map:
//!
//! - [`dataset`]: CSV loading, splitting and the synthetic generator.
//! - [`ensemble`]: the [`Predictor`] contract and the boosted tree learner.
//! - [`surrogate`]: proximity-weighted local linear importance.
//! - [`mcbrp`]: error taxonomy, Monte Carlo simulation, bounds and trends.
//! - [`report`]: aggregate statistics and file dumps.

#![forbid(unsafe_code)]

pub mod dataset;
pub mod ensemble;
mod error;
pub mod mcbrp;
pub mod report;
pub mod rng;
pub mod stats;
pub mod surrogate;

pub use dataset::{Dataset, DropPolicy, LoadOptions, SplitDataset, SyntheticDataset, SyntheticSpec};
pub use ensemble::{FnPredictor, GbrModel, GbrParams, Predictor};
pub use error::{Error, Result};
pub use mcbrp::{
    classify_errors, explain, quantile, ErrorTaxonomy, ExplainConfig, Explanation, FeatureFences,
    SimulationResult,
};
pub use surrogate::{ImportanceRanking, SurrogateParams};
