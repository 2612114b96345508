use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::{Dataset, Error, Result};

/// Quantile by linear interpolation at rank position `q * (len - 1)` of the
/// sorted values.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!("quantile level {q} outside [0, 1]")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&sorted, q))
}

pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi || frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

fn quartiles(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok((quantile_sorted(&sorted, 0.25), quantile_sorted(&sorted, 0.75)))
}

/// Partition of a test set into reasonable predictions and large errors.
///
/// A row is a large error iff its absolute error is strictly greater than
/// `q3 + 1.5 * (q3 - q1)` of all absolute errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorTaxonomy {
    pub row_ids: Vec<u64>,
    pub actual: Vec<f64>,
    pub predicted: Vec<f64>,
    /// `|actual - predicted|`, aligned with `row_ids`.
    pub errors: Vec<f64>,
    pub q1: f64,
    pub q3: f64,
    pub epsilon_large: f64,
    pub reasonable_ids: BTreeSet<u64>,
    pub large_ids: BTreeSet<u64>,
    #[serde(skip)]
    position: HashMap<u64, usize>,
}

impl ErrorTaxonomy {
    pub fn is_large(&self, id: u64) -> bool {
        self.large_ids.contains(&id)
    }

    pub fn len(&self) -> usize {
        self.row_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_ids.is_empty()
    }

    pub fn large_error_fraction(&self) -> f64 {
        self.large_ids.len() as f64 / self.len() as f64
    }

    fn index(&self, id: u64) -> Result<usize> {
        self.position.get(&id).copied().ok_or(Error::UnknownRow(id))
    }

    pub fn actual_of(&self, id: u64) -> Result<f64> {
        Ok(self.actual[self.index(id)?])
    }

    pub fn predicted_of(&self, id: u64) -> Result<f64> {
        Ok(self.predicted[self.index(id)?])
    }

    pub fn error_of(&self, id: u64) -> Result<f64> {
        Ok(self.errors[self.index(id)?])
    }
}

/// Classify each row's absolute error as reasonable or large.
pub fn classify_errors(row_ids: &[u64], actual: &[f64], predicted: &[f64]) -> Result<ErrorTaxonomy> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: actual.len(),
            right: predicted.len(),
        });
    }
    if row_ids.len() != actual.len() {
        return Err(Error::LengthMismatch {
            left: row_ids.len(),
            right: actual.len(),
        });
    }
    let errors: Vec<f64> = actual.iter().zip(predicted).map(|(t, p)| (t - p).abs()).collect();
    let (q1, q3) = quartiles(&errors)?;
    let epsilon_large = q3 + 1.5 * (q3 - q1);

    let mut position = HashMap::with_capacity(row_ids.len());
    let mut reasonable_ids = BTreeSet::new();
    let mut large_ids = BTreeSet::new();
    for (i, (&id, &e)) in row_ids.iter().zip(&errors).enumerate() {
        if position.insert(id, i).is_some() {
            return Err(Error::DuplicateRowId(id));
        }
        if e > epsilon_large {
            large_ids.insert(id);
        } else {
            reasonable_ids.insert(id);
        }
    }
    Ok(ErrorTaxonomy {
        row_ids: row_ids.to_vec(),
        actual: actual.to_vec(),
        predicted: predicted.to_vec(),
        errors,
        q1,
        q3,
        epsilon_large,
        reasonable_ids,
        large_ids,
        position,
    })
}

/// Sampling interval for one feature: Tukey's fences of its values over the
/// reasonable-prediction rows.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureFences {
    pub feature: usize,
    pub lower: f64,
    pub upper: f64,
}

impl FeatureFences {
    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    pub fn is_zero_width(&self) -> bool {
        self.lower == self.upper
    }
}

pub fn feature_fences(test: &Dataset, taxonomy: &ErrorTaxonomy, feature: usize) -> Result<FeatureFences> {
    if feature >= test.n_features() {
        return Err(Error::InvalidParameter(format!(
            "feature {feature} out of range for {} features",
            test.n_features()
        )));
    }
    if taxonomy.reasonable_ids.is_empty() {
        return Err(Error::EmptyReasonableSet);
    }
    let values = taxonomy
        .reasonable_ids
        .iter()
        .map(|&id| {
            test.position(id)
                .map(|i| test.row(i)[feature])
                .ok_or(Error::UnknownRow(id))
        })
        .collect::<Result<Vec<f64>>>()?;
    let (q1, q3) = quartiles(&values)?;
    let iqr = q3 - q1;
    Ok(FeatureFences {
        feature,
        lower: q1 - 1.5 * iqr,
        upper: q3 + 1.5 * iqr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_examples() {
        let v = [1.0, 2.0, 3.0, 4.0, 100.0];
        assert_eq!(quantile(&v, 0.25).unwrap(), 2.0);
        assert_eq!(quantile(&v, 0.75).unwrap(), 4.0);
        assert_eq!(quantile(&[100.0, 4.0, 1.0, 3.0, 2.0], 0.5).unwrap(), 3.0);
        for q in [0.0, 0.3, 1.0] {
            assert_eq!(quantile(&[5.0, 5.0, 5.0], q).unwrap(), 5.0);
            assert_eq!(quantile(&[7.0], q).unwrap(), 7.0);
        }
        assert_eq!(quantile(&[0.0, 10.0], 0.25).unwrap(), 2.5);
    }

    #[test]
    fn quantile_errors() {
        assert!(matches!(quantile(&[], 0.5), Err(Error::EmptyInput)));
        assert!(quantile(&[1.0], 1.5).is_err());
        assert!(matches!(quantile(&[1.0, f64::NAN], 0.5), Err(Error::NonFinite)));
    }

    #[test]
    fn definition_example() {
        let actual = [1.0, 2.0, 3.0, 4.0, 100.0];
        let predicted = [0.0; 5];
        let tax = classify_errors(&[10, 11, 12, 13, 14], &actual, &predicted).unwrap();
        assert_eq!((tax.q1, tax.q3, tax.epsilon_large), (2.0, 4.0, 7.0));
        assert_eq!(tax.large_ids.iter().copied().collect::<Vec<_>>(), [14]);
        assert_eq!(tax.reasonable_ids.len(), 4);
        assert_eq!(tax.error_of(14).unwrap(), 100.0);
    }

    #[test]
    fn equal_errors_are_all_reasonable() {
        let tax = classify_errors(&[0, 1, 2], &[3.0, 5.0, 1.0], &[1.0, 3.0, 3.0]).unwrap();
        assert_eq!(tax.epsilon_large, 2.0);
        assert!(tax.large_ids.is_empty());
    }

    #[test]
    fn over_and_under_prediction_count_alike() {
        let actual = [0.0; 8];
        let predicted = [0.1, -0.1, 0.2, -0.2, 0.15, -0.15, 50.0, -50.0];
        let tax = classify_errors(&(0..8).collect::<Vec<_>>(), &actual, &predicted).unwrap();
        assert_eq!(tax.large_ids.iter().copied().collect::<Vec<_>>(), [6, 7]);
    }

    #[test]
    fn classify_errors_rejects_bad_input() {
        assert!(matches!(classify_errors(&[], &[], &[]), Err(Error::EmptyInput)));
        assert!(classify_errors(&[0], &[1.0], &[1.0, 2.0]).is_err());
        assert!(matches!(
            classify_errors(&[3, 3], &[1.0, 2.0], &[1.0, 2.0]),
            Err(Error::DuplicateRowId(3))
        ));
    }

    fn one_feature(values: &[f64]) -> Dataset {
        Dataset::new(
            vec!["x".into()],
            "t",
            values.iter().map(|&v| vec![v]).collect(),
            vec![0.0; values.len()],
            (0..values.len() as u64).collect(),
        )
        .unwrap()
    }

    #[test]
    fn fences_from_reasonable_rows_only() {
        // rows 0..9 carry 1..9 and are reasonable; row 9 is a large error at 1000
        let mut values: Vec<f64> = (1..=9).map(f64::from).collect();
        values.push(1000.0);
        let ds = one_feature(&values);
        let mut predicted = vec![0.0; 10];
        predicted[9] = 1e6;
        let tax = classify_errors(ds.row_ids(), &[0.0; 10], &predicted).unwrap();
        assert!(tax.is_large(9));
        let fences = feature_fences(&ds, &tax, 0).unwrap();
        assert_eq!((fences.lower, fences.upper), (-3.0, 13.0));
        assert!(fences.contains(5.0));
    }

    #[test]
    fn constant_feature_has_zero_width_fences() {
        let ds = one_feature(&[4.0; 6]);
        let tax = classify_errors(ds.row_ids(), &[0.0; 6], &[0.0; 6]).unwrap();
        let fences = feature_fences(&ds, &tax, 0).unwrap();
        assert!(fences.is_zero_width());
        assert_eq!(fences.lower, 4.0);
    }
}
