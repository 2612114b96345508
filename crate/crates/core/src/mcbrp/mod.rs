//! Monte Carlo bounds for reasonable predictions.
//!
//! Given a model's test-set errors, [`classify_errors`] splits the test rows
//! into reasonable predictions (R) and large errors (L) with an upper Tukey
//! fence on the absolute errors. For an instance in L, [`simulate`] replaces
//! one important feature at a time by values drawn uniformly between that
//! feature's Tukey fences over R, re-predicts, and keeps the draws whose new
//! prediction lands within the large-error threshold of the actual target.
//! [`compute_bounds`] and [`compute_trend`] summarise the kept draws of each
//! feature as a `[mean - sd, mean + sd]` range and a Pearson trend, and
//! [`explain`] assembles those rows into an [`Explanation`].

mod bounds;
mod explain;
mod simulate;
mod taxonomy;

pub use bounds::{compute_bounds, compute_trend, ReasonableBounds};
pub use explain::{
    explain, ExplainConfig, Explainer, Explanation, ExplanationRow, RowStatus, Trend,
};
pub use simulate::{simulate, FeatureStratum, SimulationResult, SimulationSample};
pub use taxonomy::{classify_errors, feature_fences, quantile, ErrorTaxonomy, FeatureFences};
