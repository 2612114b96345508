//! The four pipeline commands. Each returns the lines it wants printed so
//! tests can drive them without a subprocess.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mcbrp_core::dataset::{generate_synthetic, load_csv, split_by_column_threshold};
use mcbrp_core::mcbrp::Explainer;
use mcbrp_core::report::{
    out_of_range_stats, prediction_scatter_dump, run_summary, taxonomy_for, write_frequency_csv,
    OutOfRangeStats,
};
use mcbrp_core::surrogate::rank_frequency;
use mcbrp_core::{Error as CoreError, ErrorTaxonomy, Explanation, GbrModel, SplitDataset};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::RunConfig;

pub const DATA_FILE: &str = "data.csv";
pub const MODEL_FILE: &str = "model.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const EXPLANATIONS_DIR: &str = "explanations";
pub const OUT_OF_RANGE_FILE: &str = "out_of_range.json";
pub const FREQUENCY_FILE: &str = "importance_frequency.csv";
pub const PREDICTIONS_FILE: &str = "predictions.csv";

fn ensure_dir(dir: &Path, create: bool) -> Result<()> {
    if dir.is_dir() {
        return Ok(());
    }
    if !create {
        bail!(
            "output directory {} does not exist (pass --create-dirs true to create it)",
            dir.display()
        );
    }
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_split(cfg: &RunConfig) -> Result<SplitDataset> {
    let path = cfg.data_path();
    let data = load_csv(&path, &cfg.load_options())
        .with_context(|| format!("loading {}", path.display()))?;
    let split = split_by_column_threshold(
        &data,
        &cfg.split_column,
        cfg.split_threshold,
        cfg.keep_split_column,
    )?;
    if cfg.n > split.test.n_features() {
        bail!(
            "n = {} exceeds the {} available features",
            cfg.n,
            split.test.n_features()
        );
    }
    Ok(split)
}

fn load_model(cfg: &RunConfig, split: &SplitDataset) -> Result<GbrModel> {
    let path = cfg.output_dir().join(MODEL_FILE);
    let model = GbrModel::load(&path)
        .with_context(|| format!("loading {} (run `mcbrp train` first)", path.display()))?;
    if model.feature_names() != split.test.feature_names() {
        bail!("model features do not match the data columns");
    }
    Ok(model)
}

fn thread_pool(cfg: &RunConfig) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers())
        .build()?)
}

/// Write a synthetic dataset to `<output_dir>/data.csv`.
pub fn gen_data(cfg: &RunConfig) -> Result<Vec<String>> {
    let dir = cfg.output_dir();
    ensure_dir(&dir, cfg.create_dirs)?;
    let data = generate_synthetic(&cfg.synthetic_spec(), cfg.seed)?;
    let path = dir.join(DATA_FILE);
    data.dataset.write_csv(&path, None)?;
    Ok(vec![format!(
        "wrote {} rows ({} outlier rows) to {}",
        data.dataset.n_rows(),
        data.outlier_row_ids.len(),
        path.display()
    )])
}

/// Fit the model on the training split and summarise it on the test split.
pub fn train(cfg: &RunConfig) -> Result<Vec<String>> {
    let dir = cfg.output_dir();
    ensure_dir(&dir, cfg.create_dirs)?;
    let split = load_split(cfg)?;
    let model = GbrModel::fit(&split.train, &cfg.model_params())?;
    let taxonomy = taxonomy_for(&model, &split.test)?;
    let summary = run_summary(&model, &split, &taxonomy).context("summarising the test split")?;
    model.save(dir.join(MODEL_FILE))?;
    write_json(&dir.join(SUMMARY_FILE), &summary)?;
    Ok(vec![format!(
        "R^2 {:.4} on {} test rows; {} large errors ({:.2}%) above {:.4}",
        summary.r_squared,
        summary.test_rows,
        summary.large_errors,
        100.0 * summary.large_error_fraction,
        summary.epsilon_large
    )])
}

/// Which test rows to explain.
#[derive(Clone, Debug)]
pub enum Selector {
    Rows(Vec<u64>),
    AllLarge,
}

/// What is written for an instance that could not be explained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Unexplained {
    pub instance_id: u64,
    pub status: String,
    pub reason: String,
}

fn explanation_paths(dir: &Path, id: u64) -> (PathBuf, PathBuf) {
    (
        dir.join(format!("{id}.json")),
        dir.join(format!("{id}.txt")),
    )
}

/// Explain the selected rows into `<output_dir>/explanations/<row_id>.{json,txt}`.
pub fn explain(cfg: &RunConfig, selector: &Selector, force: bool) -> Result<Vec<String>> {
    let split = load_split(cfg)?;
    let model = load_model(cfg, &split)?;
    let taxonomy = taxonomy_for(&model, &split.test)?;

    let ids: Vec<u64> = match selector {
        Selector::AllLarge => taxonomy.large_ids.iter().copied().collect(),
        Selector::Rows(ids) => {
            for &id in ids {
                taxonomy.error_of(id).map_err(|_| CoreError::UnknownRow(id))?;
                if !force && !taxonomy.is_large(id) {
                    bail!(
                        "row {id} is a reasonable prediction, not a large error; pass --force to explain it anyway"
                    );
                }
            }
            ids.clone()
        }
    };

    let out_dir = cfg.output_dir().join(EXPLANATIONS_DIR);
    ensure_dir(&out_dir, true)?;
    let explainer = Explainer::new(&model, &split.train, &split.test, &taxonomy, cfg.explain_config())?;
    let outcomes: Vec<(u64, Result<Explanation, CoreError>)> = thread_pool(cfg)?.install(|| {
        ids.par_iter()
            .map(|&id| {
                let outcome = explainer
                    .rank(id)
                    .and_then(|ranking| explainer.explain_ranked(id, &ranking));
                (id, outcome)
            })
            .collect()
    });

    let (mut explained, mut flagged) = (0, 0);
    for (id, outcome) in outcomes {
        let (json, txt) = explanation_paths(&out_dir, id);
        match outcome {
            Ok(e) => {
                write_json(&json, &e)?;
                fs::write(&txt, e.render_table()).with_context(|| format!("writing {}", txt.display()))?;
                explained += 1;
            }
            Err(err @ CoreError::Unexplainable { .. }) => {
                let doc = Unexplained {
                    instance_id: id,
                    status: "insufficient_evidence".into(),
                    reason: err.to_string(),
                };
                write_json(&json, &doc)?;
                fs::write(&txt, format!("{err}\n"))
                    .with_context(|| format!("writing {}", txt.display()))?;
                flagged += 1;
            }
            Err(err) => return Err(err).with_context(|| format!("explaining row {id}")),
        }
    }
    Ok(vec![format!(
        "explained {explained} rows, {flagged} flagged insufficient evidence, in {}",
        out_dir.display()
    )])
}

/// Contents of `out_of_range.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutOfRangeReport {
    pub large_errors: usize,
    pub reasonable_predictions: usize,
    pub unexplainable_large: usize,
    pub unexplainable_reasonable: usize,
    pub note: Option<String>,
    pub stats: Option<OutOfRangeStats>,
}

/// Explain every test row and write the out-of-range statistics, the
/// importance frequency table and the prediction dump.
pub fn report(cfg: &RunConfig) -> Result<Vec<String>> {
    let dir = cfg.output_dir();
    ensure_dir(&dir, cfg.create_dirs)?;
    let split = load_split(cfg)?;
    let model = load_model(cfg, &split)?;
    let taxonomy: ErrorTaxonomy = prediction_scatter_dump(&model, &split.test, dir.join(PREDICTIONS_FILE))?;

    let explainer = Explainer::new(&model, &split.train, &split.test, &taxonomy, cfg.explain_config())?;
    let ids = taxonomy.row_ids.clone();
    let outcomes = thread_pool(cfg)?.install(|| {
        ids.par_iter()
            .map(|&id| {
                let ranking = explainer.rank(id)?;
                let explanation = match explainer.explain_ranked(id, &ranking) {
                    Ok(e) => Some(e),
                    Err(CoreError::Unexplainable { .. }) => None,
                    Err(e) => return Err(e),
                };
                Ok((id, ranking, explanation))
            })
            .collect::<Result<Vec<_>, CoreError>>()
    })?;

    let mut rankings = (Vec::new(), Vec::new());
    let mut explanations = (Vec::new(), Vec::new());
    let mut unexplainable = (0, 0);
    for (id, ranking, explanation) in outcomes {
        let large = taxonomy.is_large(id);
        let (r, e, u) = if large {
            (&mut rankings.0, &mut explanations.0, &mut unexplainable.0)
        } else {
            (&mut rankings.1, &mut explanations.1, &mut unexplainable.1)
        };
        r.push(ranking);
        match explanation {
            Some(x) => e.push(x),
            None => *u += 1,
        }
    }

    let names = split.test.feature_names();
    let reasonable_freq = rank_frequency(&rankings.1, names)?;
    let large_freq = if rankings.0.is_empty() {
        reasonable_freq
            .iter()
            .map(|f| mcbrp_core::surrogate::FeatureFrequency {
                feature: f.feature.clone(),
                fraction: f64::NAN,
            })
            .collect()
    } else {
        rank_frequency(&rankings.0, names)?
    };
    write_frequency_csv(dir.join(FREQUENCY_FILE), &large_freq, &reasonable_freq)?;

    let (stats, note) = if taxonomy.large_ids.is_empty() {
        (None, Some("no large errors in the test set".to_string()))
    } else if explanations.0.is_empty() || explanations.1.is_empty() {
        (None, Some("one group has no explainable instances".to_string()))
    } else {
        (Some(out_of_range_stats(&explanations.0, &explanations.1)?), None)
    };
    let doc = OutOfRangeReport {
        large_errors: taxonomy.large_ids.len(),
        reasonable_predictions: taxonomy.reasonable_ids.len(),
        unexplainable_large: unexplainable.0,
        unexplainable_reasonable: unexplainable.1,
        note,
        stats,
    };
    write_json(&dir.join(OUT_OF_RANGE_FILE), &doc)?;

    let headline = match &doc.stats {
        Some(s) => format!(
            "all {} features out of range: {:.1}% of large errors vs {:.1}% of reasonable predictions",
            s.n,
            100.0 * s.all_out_fraction_large,
            100.0 * s.all_out_fraction_reasonable
        ),
        None => doc.note.clone().unwrap_or_default(),
    };
    Ok(vec![
        headline,
        format!(
            "wrote {}, {} and {} to {}",
            OUT_OF_RANGE_FILE,
            FREQUENCY_FILE,
            PREDICTIONS_FILE,
            dir.display()
        ),
    ])
}
