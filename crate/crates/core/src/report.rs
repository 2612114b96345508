//! Aggregate statistics over explanations and plain CSV/JSON artifacts.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ensemble::{r_squared, Predictor};
use crate::mcbrp::{classify_errors, ErrorTaxonomy, Explanation};
use crate::surrogate::FeatureFrequency;
use crate::{Dataset, Error, Result, SplitDataset};

/// How many of each instance's top-n features fall outside their
/// reasonable range, for large errors versus reasonable predictions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutOfRangeStats {
    pub n: usize,
    pub count_large: usize,
    pub count_reasonable: usize,
    /// Entry `k` is the fraction of instances with exactly `k` features out of range.
    pub histogram_large: Vec<f64>,
    pub histogram_reasonable: Vec<f64>,
    pub all_out_fraction_large: f64,
    pub all_out_fraction_reasonable: f64,
}

fn histogram(explanations: &[Explanation], n: usize) -> Result<Vec<f64>> {
    if explanations.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut counts = vec![0usize; n + 1];
    for e in explanations {
        if e.n != n || e.rows.len() != n {
            return Err(Error::MixedFeatureCounts(n, e.rows.len()));
        }
        counts[e.out_of_range_count()] += 1;
    }
    let total = explanations.len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / total).collect())
}

pub fn out_of_range_stats(large: &[Explanation], reasonable: &[Explanation]) -> Result<OutOfRangeStats> {
    let n = large.first().ok_or(Error::EmptyInput)?.n;
    let histogram_large = histogram(large, n)?;
    let histogram_reasonable = histogram(reasonable, n)?;
    Ok(OutOfRangeStats {
        n,
        count_large: large.len(),
        count_reasonable: reasonable.len(),
        all_out_fraction_large: histogram_large[n],
        all_out_fraction_reasonable: histogram_reasonable[n],
        histogram_large,
        histogram_reasonable,
    })
}

/// Headline numbers of one train/evaluate run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub r_squared: f64,
    pub large_error_fraction: f64,
    pub epsilon_large: f64,
    pub q1: f64,
    pub q3: f64,
    pub train_rows: usize,
    pub test_rows: usize,
    pub large_errors: usize,
    pub reasonable_predictions: usize,
}

pub fn run_summary<P: Predictor + ?Sized>(
    model: &P,
    split: &SplitDataset,
    taxonomy: &ErrorTaxonomy,
) -> Result<RunSummary> {
    if taxonomy.len() != split.test.n_rows() {
        return Err(Error::LengthMismatch {
            left: taxonomy.len(),
            right: split.test.n_rows(),
        });
    }
    Ok(RunSummary {
        r_squared: r_squared(model, &split.test)?,
        large_error_fraction: taxonomy.large_error_fraction(),
        epsilon_large: taxonomy.epsilon_large,
        q1: taxonomy.q1,
        q3: taxonomy.q3,
        train_rows: split.train.n_rows(),
        test_rows: split.test.n_rows(),
        large_errors: taxonomy.large_ids.len(),
        reasonable_predictions: taxonomy.reasonable_ids.len(),
    })
}

/// Predict every test row and classify the errors.
pub fn taxonomy_for<P: Predictor + ?Sized>(model: &P, test: &Dataset) -> Result<ErrorTaxonomy> {
    if test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let predicted = model.predict_batch(test.rows())?;
    classify_errors(test.row_ids(), test.target(), &predicted)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Write `row_id,actual,predicted,error,is_large` for every test row.
/// Values are written with round-trip precision.
pub fn prediction_scatter_dump<P: Predictor + ?Sized>(
    model: &P,
    test: &Dataset,
    path: impl AsRef<Path>,
) -> Result<ErrorTaxonomy> {
    let path = path.as_ref();
    let taxonomy = taxonomy_for(model, test)?;
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(out, "row_id,actual,predicted,error,is_large").map_err(io)?;
    for i in 0..taxonomy.len() {
        let id = taxonomy.row_ids[i];
        writeln!(
            out,
            "{id},{},{},{},{}",
            taxonomy.actual[i],
            taxonomy.predicted[i],
            taxonomy.errors[i],
            u8::from(taxonomy.is_large(id))
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)?;
    Ok(taxonomy)
}

/// Write `feature,large_error_fraction,reasonable_fraction`, one line per
/// feature in the order given.
pub fn write_frequency_csv(
    path: impl AsRef<Path>,
    large: &[FeatureFrequency],
    reasonable: &[FeatureFrequency],
) -> Result<()> {
    let path = path.as_ref();
    if large.len() != reasonable.len() {
        return Err(Error::LengthMismatch {
            left: large.len(),
            right: reasonable.len(),
        });
    }
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(out, "feature,large_error_fraction,reasonable_fraction").map_err(io)?;
    for (l, r) in large.iter().zip(reasonable) {
        if l.feature != r.feature {
            return Err(Error::InvalidParameter(format!(
                "frequency tables disagree: `{}` vs `{}`",
                l.feature, r.feature
            )));
        }
        writeln!(out, "{},{},{}", l.feature, l.fraction, r.fraction).map_err(io)?;
    }
    out.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcbrp::{ExplanationRow, RowStatus};

    fn explanation(flags: &[bool]) -> Explanation {
        Explanation {
            instance_id: 0,
            actual: 1.0,
            predicted: 2.0,
            error: 1.0,
            epsilon_large: 0.5,
            is_large_error: true,
            n: flags.len(),
            m: 10,
            surrogate_fit_quality: 1.0,
            rows: flags
                .iter()
                .enumerate()
                .map(|(i, &out_of_range)| ExplanationRow {
                    input: "A".into(),
                    feature_index: i,
                    feature: format!("x{i}"),
                    importance: 1.0,
                    observed: 0.0,
                    reasonable_low: Some(1.0),
                    reasonable_high: Some(2.0),
                    trend: None,
                    trend_text: String::new(),
                    out_of_range,
                    stratum_size: 40,
                    status: RowStatus::Bounded,
                })
                .collect(),
        }
    }

    #[test]
    fn all_out_for_every_large_error() {
        let large = vec![explanation(&[true; 5]); 3];
        let reasonable = vec![explanation(&[true, false, true, false, false])];
        let stats = out_of_range_stats(&large, &reasonable).unwrap();
        assert_eq!(stats.all_out_fraction_large, 1.0);
        assert_eq!(stats.histogram_reasonable, [0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(stats.all_out_fraction_reasonable, 0.0);
    }

    #[test]
    fn swapping_groups_swaps_histograms() {
        let a = vec![explanation(&[true, true]), explanation(&[false, true])];
        let b = vec![explanation(&[false, false])];
        let ab = out_of_range_stats(&a, &b).unwrap();
        let ba = out_of_range_stats(&b, &a).unwrap();
        assert_eq!(ab.histogram_large, ba.histogram_reasonable);
        assert_eq!(ab.histogram_reasonable, ba.histogram_large);
        assert!((ab.histogram_large.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mixed_n_and_empty_groups_are_rejected() {
        let a = vec![explanation(&[true, true])];
        let b = vec![explanation(&[true, true, false])];
        assert!(matches!(out_of_range_stats(&a, &b), Err(Error::MixedFeatureCounts(..))));
        assert!(out_of_range_stats(&[], &b).is_err());
        assert!(out_of_range_stats(&a, &[]).is_err());
    }
}
