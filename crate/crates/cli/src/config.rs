//! Run configuration: a flat JSON document whose every field can be
//! overridden by a command-line flag of the same name.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use mcbrp_core::{DropPolicy, ExplainConfig, GbrParams, LoadOptions, SurrogateParams, SyntheticSpec};
use serde::{Deserialize, Serialize};

pub const OUTPUT_DIR_ENV: &str = "MCBRP_OUTPUT_DIR";
const DEFAULT_OUTPUT_DIR: &str = "mcbrp-out";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Input CSV; defaults to `data.csv` in the output directory.
    pub data: Option<PathBuf>,
    pub target_column: String,
    pub id_column: Option<String>,
    pub drop_policy: DropPolicy,
    pub split_column: String,
    pub split_threshold: f64,
    pub keep_split_column: bool,

    pub n_features: usize,
    pub n_rows: usize,
    pub outlier_fraction: f64,
    pub noise_std: f64,

    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_samples_leaf: usize,

    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub min_stratum: usize,
    pub num_samples: usize,
    pub kernel_width: Option<f64>,

    pub output_dir: Option<PathBuf>,
    pub create_dirs: bool,
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let synthetic = SyntheticSpec::default();
        let model = GbrParams::default();
        let explain = ExplainConfig::default();
        Self {
            data: None,
            target_column: "sales".into(),
            id_column: None,
            drop_policy: DropPolicy::default(),
            split_column: "year".into(),
            split_threshold: 2014.0,
            keep_split_column: false,
            n_features: synthetic.n_features,
            n_rows: synthetic.n_rows,
            outlier_fraction: synthetic.outlier_fraction,
            noise_std: synthetic.noise_std,
            n_trees: model.n_trees,
            max_depth: model.max_depth,
            learning_rate: model.learning_rate,
            min_samples_leaf: model.min_samples_leaf,
            n: explain.n,
            m: explain.m,
            seed: 0,
            min_stratum: explain.min_stratum,
            num_samples: explain.surrogate.num_samples,
            kernel_width: None,
            output_dir: None,
            create_dirs: true,
            workers: None,
        }
    }
}

/// Flag overrides for [`RunConfig`]; `None` leaves the configured value.
#[derive(Args, Clone, Debug, Default)]
pub struct ConfigOverrides {
    /// JSON config file; flags override its fields
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    #[arg(long, global = true)]
    pub target_column: Option<String>,
    #[arg(long, global = true)]
    pub id_column: Option<String>,
    /// reject | drop-row
    #[arg(long, global = true)]
    pub drop_policy: Option<DropPolicy>,
    #[arg(long, global = true)]
    pub split_column: Option<String>,
    #[arg(long, global = true)]
    pub split_threshold: Option<f64>,
    #[arg(long, global = true)]
    pub keep_split_column: Option<bool>,
    #[arg(long, global = true)]
    pub n_features: Option<usize>,
    #[arg(long, global = true)]
    pub n_rows: Option<usize>,
    #[arg(long, global = true)]
    pub outlier_fraction: Option<f64>,
    #[arg(long, global = true)]
    pub noise_std: Option<f64>,
    #[arg(long, global = true)]
    pub n_trees: Option<usize>,
    #[arg(long, global = true)]
    pub max_depth: Option<usize>,
    #[arg(long, global = true)]
    pub learning_rate: Option<f64>,
    #[arg(long, global = true)]
    pub min_samples_leaf: Option<usize>,
    /// Number of important features per explanation
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Monte Carlo draws per feature
    #[arg(long, global = true)]
    pub m: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub min_stratum: Option<usize>,
    #[arg(long, global = true)]
    pub num_samples: Option<usize>,
    #[arg(long, global = true)]
    pub kernel_width: Option<f64>,
    /// Output directory (default: $MCBRP_OUTPUT_DIR, else ./mcbrp-out)
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Create a missing output directory instead of failing
    #[arg(long, global = true)]
    pub create_dirs: Option<bool>,
    /// Worker threads for explanations
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

macro_rules! apply {
    ($cfg:ident, $ov:ident; $($field:ident),* $(,)?) => {
        $( if let Some(v) = $ov.$field.clone() { $cfg.$field = v; } )*
    };
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Config file (if any) with flag overrides applied, validated.
    pub fn resolve(ov: &ConfigOverrides) -> Result<Self> {
        let mut cfg = match &ov.config {
            Some(path) => Self::from_file(path)?,
            None => Self::default(),
        };
        apply!(cfg, ov;
            target_column, drop_policy, split_column, split_threshold, keep_split_column,
            n_features, n_rows, outlier_fraction, noise_std, n_trees, max_depth,
            learning_rate, min_samples_leaf, n, m, seed, min_stratum, num_samples,
            create_dirs,
        );
        if ov.data.is_some() {
            cfg.data = ov.data.clone();
        }
        if ov.id_column.is_some() {
            cfg.id_column = ov.id_column.clone();
        }
        if ov.kernel_width.is_some() {
            cfg.kernel_width = ov.kernel_width;
        }
        if ov.output_dir.is_some() {
            cfg.output_dir = ov.output_dir.clone();
        }
        if ov.workers.is_some() {
            cfg.workers = ov.workers;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n", self.n),
            ("m", self.m),
            ("n_trees", self.n_trees),
            ("max_depth", self.max_depth),
            ("min_samples_leaf", self.min_samples_leaf),
            ("min_stratum", self.min_stratum),
            ("num_samples", self.num_samples),
        ] {
            if v == 0 {
                bail!("{name} must be positive");
            }
        }
        if self.workers == Some(0) {
            bail!("workers must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            bail!("learning_rate must lie in (0, 1]");
        }
        if let Some(w) = self.kernel_width {
            if !(w.is_finite() && w > 0.0) {
                bail!("kernel_width must be positive");
            }
        }
        Ok(())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }

    pub fn data_path(&self) -> PathBuf {
        self.data
            .clone()
            .unwrap_or_else(|| self.output_dir().join("data.csv"))
    }

    pub fn synthetic_spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            n_features: self.n_features,
            n_rows: self.n_rows,
            outlier_fraction: self.outlier_fraction,
            noise_std: self.noise_std,
            ..SyntheticSpec::default()
        }
    }

    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            target_column: self.target_column.clone(),
            drop_policy: self.drop_policy,
            id_column: self.id_column.clone(),
        }
    }

    pub fn model_params(&self) -> GbrParams {
        GbrParams {
            n_trees: self.n_trees,
            max_depth: self.max_depth,
            learning_rate: self.learning_rate,
            min_samples_leaf: self.min_samples_leaf,
            seed: self.seed,
        }
    }

    pub fn explain_config(&self) -> ExplainConfig {
        ExplainConfig {
            n: self.n,
            m: self.m,
            seed: self.seed,
            min_stratum: self.min_stratum,
            surrogate: SurrogateParams {
                num_samples: self.num_samples,
                kernel_width: self.kernel_width,
                seed: self.seed,
            },
        }
    }

    pub fn workers(&self) -> usize {
        self.workers.unwrap_or_else(|| {
            std::thread::available_parallelism().map_or(1, std::num::NonZeroUsize::get)
        })
    }
}
