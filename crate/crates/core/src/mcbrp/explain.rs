use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{compute_bounds, compute_trend, feature_fences, simulate, ErrorTaxonomy, FeatureFences};
use crate::ensemble::Predictor;
use crate::surrogate::{local_importance, ImportanceRanking, SurrogateParams};
use crate::{Dataset, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExplainConfig {
    /// Number of important features to explain.
    pub n: usize,
    /// Monte Carlo draws per feature.
    pub m: usize,
    /// Base seed for both the surrogate probes and the simulation draws.
    pub seed: u64,
    /// Accepted draws a feature needs before its range is reported.
    pub min_stratum: usize,
    /// Surrogate settings; its own `seed` is replaced by `seed` above.
    pub surrogate: SurrogateParams,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        Self {
            n: 5,
            m: 10_000,
            seed: 0,
            min_stratum: 30,
            surrogate: SurrogateParams::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Bounded,
    ZeroWidth,
    InsufficientEvidence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Increasing,
    Decreasing,
    Undetected,
}

impl Trend {
    pub fn from_correlation(rho: Option<f64>) -> Self {
        match rho {
            Some(r) if r > 0.0 => Self::Increasing,
            Some(r) if r < 0.0 => Self::Decreasing,
            _ => Self::Undetected,
        }
    }

    pub fn text(self) -> &'static str {
        match self {
            Self::Increasing => "As input increases, prediction increases",
            Self::Decreasing => "As input increases, prediction decreases",
            Self::Undetected => "No detectable trend",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplanationRow {
    /// Row label in the rendered table: A, B, C, ...
    pub input: String,
    pub feature_index: usize,
    pub feature: String,
    /// Signed surrogate slope that placed the feature in the top n.
    pub importance: f64,
    pub observed: f64,
    pub reasonable_low: Option<f64>,
    pub reasonable_high: Option<f64>,
    pub trend: Option<f64>,
    pub trend_text: String,
    pub out_of_range: bool,
    /// Accepted draws for this feature.
    pub stratum_size: usize,
    pub status: RowStatus,
}

/// Why one prediction was a large error, feature by feature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub instance_id: u64,
    pub actual: f64,
    pub predicted: f64,
    pub error: f64,
    pub epsilon_large: f64,
    pub is_large_error: bool,
    pub n: usize,
    pub m: usize,
    pub surrogate_fit_quality: f64,
    pub rows: Vec<ExplanationRow>,
}

fn input_label(i: usize) -> String {
    if i < 26 {
        char::from(b'A' + i as u8).to_string()
    } else {
        format!("F{}", i + 1)
    }
}

fn format_range(row: &ExplanationRow) -> String {
    match (row.status, row.reasonable_low, row.reasonable_high) {
        (RowStatus::InsufficientEvidence, ..) | (_, None, _) | (_, _, None) => {
            format!("insufficient evidence ({} accepted)", row.stratum_size)
        }
        (status, Some(a), Some(b)) => {
            let range = if b - a >= 100.0 {
                format!("[{a:.0},{b:.0}]")
            } else {
                format!("[{a:.2},{b:.2}]")
            };
            if status == RowStatus::ZeroWidth {
                format!("{range} (zero width)")
            } else {
                range
            }
        }
    }
}

impl Explanation {
    pub fn out_of_range_count(&self) -> usize {
        self.rows.iter().filter(|r| r.out_of_range).count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Plain-text table with the columns Input, Definition, Trend, Value and
    /// Reasonable range, preceded by a one-line summary of the prediction.
    pub fn render_table(&self) -> String {
        let header = ["Input", "Definition", "Trend", "Value", "Reasonable range"];
        let body: Vec<[String; 5]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.input.clone(),
                    r.feature.clone(),
                    r.trend_text.clone(),
                    format!("{:.2}", r.observed),
                    format_range(r),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for cells in &body {
            for (w, c) in widths.iter_mut().zip(cells) {
                *w = (*w).max(c.len());
            }
        }

        let mut out = String::new();
        let kind = if self.is_large_error { "large error" } else { "reasonable prediction" };
        let _ = writeln!(
            out,
            "Instance {}: actual {:.2}, predicted {:.2}, error {:.2} ({kind}; threshold {:.2})",
            self.instance_id, self.actual, self.predicted, self.error, self.epsilon_large
        );
        let line = |cells: [&str; 5]| {
            let mut s = String::new();
            for (i, (c, w)) in cells.iter().zip(widths).enumerate() {
                if i > 0 {
                    s.push_str("  ");
                }
                // numbers right-aligned, text left-aligned
                if i == 3 {
                    let _ = write!(s, "{c:>w$}");
                } else {
                    let _ = write!(s, "{c:<w$}");
                }
            }
            s.trim_end().to_string()
        };
        let _ = writeln!(out, "{}", line(header));
        let rule: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
        let _ = writeln!(out, "{}", "-".repeat(rule));
        for cells in &body {
            let _ = writeln!(out, "{}", line(cells.each_ref().map(String::as_str)));
        }
        out
    }
}

/// Shared state for explaining many instances of one test set: the model,
/// the surrogate background, the error taxonomy and the per-feature fences
/// (computed once from the reasonable rows).
pub struct Explainer<'a, P: Predictor + ?Sized> {
    model: &'a P,
    background: &'a Dataset,
    test: &'a Dataset,
    taxonomy: &'a ErrorTaxonomy,
    fences: Vec<FeatureFences>,
    config: ExplainConfig,
}

impl<'a, P: Predictor + ?Sized> Explainer<'a, P> {
    pub fn new(
        model: &'a P,
        background: &'a Dataset,
        test: &'a Dataset,
        taxonomy: &'a ErrorTaxonomy,
        config: ExplainConfig,
    ) -> Result<Self> {
        if config.n == 0 || config.n > test.n_features() {
            return Err(Error::InvalidParameter(format!(
                "n must lie in [1, {}], got {}",
                test.n_features(),
                config.n
            )));
        }
        if config.m == 0 {
            return Err(Error::InvalidParameter("m must be at least 1".into()));
        }
        if background.feature_names() != test.feature_names() {
            return Err(Error::InvalidDataset(
                "background and test feature layouts differ".into(),
            ));
        }
        let fences = (0..test.n_features())
            .map(|j| feature_fences(test, taxonomy, j))
            .collect::<Result<_>>()?;
        Ok(Self {
            model,
            background,
            test,
            taxonomy,
            fences,
            config,
        })
    }

    pub fn config(&self) -> &ExplainConfig {
        &self.config
    }

    pub fn fences(&self) -> &[FeatureFences] {
        &self.fences
    }

    fn instance(&self, row_id: u64) -> Result<&'a [f64]> {
        let pos = self.test.position(row_id).ok_or(Error::UnknownRow(row_id))?;
        Ok(self.test.row(pos))
    }

    /// Top-n features of a test row under the local surrogate.
    pub fn rank(&self, row_id: u64) -> Result<ImportanceRanking> {
        let params = SurrogateParams {
            seed: self.config.seed,
            ..self.config.surrogate.clone()
        };
        local_importance(
            self.model,
            row_id,
            self.instance(row_id)?,
            self.background,
            self.config.n,
            &params,
        )
    }

    /// Explain a large-error row.
    pub fn explain(&self, row_id: u64) -> Result<Explanation> {
        if !self.taxonomy.is_large(row_id) {
            self.taxonomy.error_of(row_id)?;
            return Err(Error::NotLargeError(row_id));
        }
        self.explain_ranked(row_id, &self.rank(row_id)?)
    }

    /// Explain any test row, large error or not, with a precomputed ranking.
    /// Acceptance always uses the row's own target and the global threshold.
    pub fn explain_ranked(&self, row_id: u64, ranking: &ImportanceRanking) -> Result<Explanation> {
        let x = self.instance(row_id)?;
        let actual = self.taxonomy.actual_of(row_id)?;
        let sim = simulate(
            self.model,
            row_id,
            x,
            actual,
            ranking,
            self.taxonomy.epsilon_large,
            &self.fences,
            self.config.m,
            self.config.seed,
        )?;

        let names = self.test.feature_names();
        let rows: Vec<ExplanationRow> = sim
            .strata
            .iter()
            .zip(&ranking.ranked_features)
            .enumerate()
            .map(|(i, (stratum, ranked))| {
                let accepted = stratum.accepted();
                let observed = x[stratum.feature];
                let (low, high, status, out_of_range) =
                    match compute_bounds(&accepted, self.config.min_stratum) {
                        Ok(b) => {
                            let status = if b.zero_width { RowStatus::ZeroWidth } else { RowStatus::Bounded };
                            (Some(b.low), Some(b.high), status, !b.contains(observed))
                        }
                        Err(_) => (None, None, RowStatus::InsufficientEvidence, false),
                    };
                let trend = compute_trend(&accepted);
                ExplanationRow {
                    input: input_label(i),
                    feature_index: stratum.feature,
                    feature: names[stratum.feature].clone(),
                    importance: ranked.weight,
                    observed,
                    reasonable_low: low,
                    reasonable_high: high,
                    trend,
                    trend_text: Trend::from_correlation(trend).text().to_string(),
                    out_of_range,
                    stratum_size: accepted.len(),
                    status,
                }
            })
            .collect();

        if rows.iter().all(|r| r.status == RowStatus::InsufficientEvidence) {
            return Err(Error::Unexplainable { instance_id: row_id });
        }
        Ok(Explanation {
            instance_id: row_id,
            actual,
            predicted: self.taxonomy.predicted_of(row_id)?,
            error: self.taxonomy.error_of(row_id)?,
            epsilon_large: self.taxonomy.epsilon_large,
            is_large_error: self.taxonomy.is_large(row_id),
            n: self.config.n,
            m: self.config.m,
            surrogate_fit_quality: ranking.surrogate_fit_quality,
            rows,
        })
    }
}

/// Explain one large-error row of `test`: rank its features with the local
/// surrogate over `background`, simulate, and summarise each feature.
pub fn explain<P: Predictor + ?Sized>(
    f: &P,
    background: &Dataset,
    test: &Dataset,
    taxonomy: &ErrorTaxonomy,
    row_id: u64,
    config: &ExplainConfig,
) -> Result<Explanation> {
    Explainer::new(f, background, test, taxonomy, config.clone())?.explain(row_id)
}
