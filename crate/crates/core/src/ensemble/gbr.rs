use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tree::{Node, RegressionTree, TreeBuilder};
use super::{check_width, Predictor};
use crate::stats::RunningStats;
use crate::{Dataset, Error, Result};

const FORMAT: &str = "mcbrp-gbr";
const VERSION: u32 = 1;

/// Boosting hyper-parameters. Defaults follow the common least-squares
/// gradient boosting defaults: 100 depth-3 trees at learning rate 0.1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbrParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_samples_leaf: usize,
    /// Reserved for row/feature subsampling, which is not enabled; fitting is
    /// fully deterministic regardless of its value.
    pub seed: u64,
}

impl Default for GbrParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: 3,
            learning_rate: 0.1,
            min_samples_leaf: 1,
            seed: 0,
        }
    }
}

impl GbrParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 {
            return Err(Error::InvalidParameter("max_depth must be at least 1".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::InvalidParameter("min_samples_leaf must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidParameter("learning_rate must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// The persisted form of a [`GbrModel`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ModelDocument {
    format: String,
    version: u32,
    feature_names: Vec<String>,
    init_value: f64,
    learning_rate: f64,
    max_depth: usize,
    trees: Vec<RegressionTree>,
}

impl ModelDocument {
    fn validate(&self) -> Result<()> {
        if self.format != FORMAT {
            return Err(Error::ModelFormat(format!("unknown format `{}`", self.format)));
        }
        if self.version != VERSION {
            return Err(Error::ModelFormat(format!("unsupported version {}", self.version)));
        }
        if !self.init_value.is_finite() || !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::ModelFormat("invalid init_value or learning_rate".into()));
        }
        for (k, tree) in self.trees.iter().enumerate() {
            tree.validate(self.feature_names.len())
                .map_err(|e| Error::ModelFormat(format!("tree {k}: {e}")))?;
            if tree.depth() > self.max_depth {
                return Err(Error::ModelFormat(format!("tree {k} is deeper than max_depth")));
            }
        }
        Ok(())
    }
}

/// All trees packed into one array for prediction. Leaves point to
/// themselves on both sides, so a tree is evaluated by exactly `depth`
/// child steps with no data-dependent loop exit.
#[derive(Clone, Copy, Debug, PartialEq)]
struct PackedNode {
    threshold: f64,
    feature: u32,
    /// `[<= threshold, > threshold]`
    children: [u32; 2],
    value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct PackedTree {
    root: u32,
    depth: u32,
}

fn pack(trees: &[RegressionTree]) -> (Vec<PackedNode>, Vec<PackedTree>) {
    let mut nodes = Vec::new();
    let mut roots = Vec::with_capacity(trees.len());
    for tree in trees {
        let base = nodes.len() as u32;
        roots.push(PackedTree {
            root: base,
            depth: tree.depth() as u32,
        });
        nodes.extend(tree.nodes.iter().enumerate().map(|(i, node)| match *node {
            Node::Leaf { value } => PackedNode {
                threshold: f64::INFINITY,
                feature: 0,
                children: [base + i as u32; 2],
                value,
            },
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => PackedNode {
                threshold,
                feature: feature as u32,
                children: [base + left as u32, base + right as u32],
                value: 0.0,
            },
        }));
    }
    (nodes, roots)
}

/// A fitted least-squares boosted tree ensemble.
///
/// Serializes to a versioned JSON document; see the repository README for
/// the schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelDocument", into = "ModelDocument")]
pub struct GbrModel {
    doc: ModelDocument,
    packed: Vec<PackedNode>,
    roots: Vec<PackedTree>,
}

impl TryFrom<ModelDocument> for GbrModel {
    type Error = Error;

    fn try_from(doc: ModelDocument) -> Result<Self> {
        doc.validate()?;
        let (packed, roots) = pack(&doc.trees);
        Ok(Self { doc, packed, roots })
    }
}

impl From<GbrModel> for ModelDocument {
    fn from(model: GbrModel) -> Self {
        model.doc
    }
}

impl GbrModel {
    /// Stagewise least-squares boosting. Starts from the target mean; each
    /// stage fits a tree to the current residuals and adds it scaled by the
    /// learning rate.
    pub fn fit(train: &Dataset, params: &GbrParams) -> Result<Self> {
        params.validate()?;
        if train.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let init_value = RunningStats::from_iter(train.target().iter().copied())
            .mean()
            .ok_or(Error::EmptyDataset)?;
        let columns: Vec<Vec<f64>> = (0..train.n_features()).map(|j| train.column(j)).collect();
        let builder = TreeBuilder::new(&columns, params.max_depth, params.min_samples_leaf);

        let mut current = vec![init_value; train.n_rows()];
        let mut residuals = vec![0.0; train.n_rows()];
        let mut trees = Vec::with_capacity(params.n_trees);
        for _ in 0..params.n_trees {
            for ((r, t), p) in residuals.iter_mut().zip(train.target()).zip(&current) {
                *r = t - p;
            }
            let tree = builder.fit(&residuals);
            for (p, row) in current.iter_mut().zip(train.rows()) {
                *p += params.learning_rate * tree.predict(row);
            }
            trees.push(tree);
        }

        Self::try_from(ModelDocument {
            format: FORMAT.into(),
            version: VERSION,
            feature_names: train.feature_names().to_vec(),
            init_value,
            learning_rate: params.learning_rate,
            max_depth: params.max_depth,
            trees,
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.doc.feature_names
    }

    pub fn init_value(&self) -> f64 {
        self.doc.init_value
    }

    pub fn learning_rate(&self) -> f64 {
        self.doc.learning_rate
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.doc.trees
    }

    /// Prediction using only the first `stages` trees.
    pub fn predict_staged(&self, row: &[f64], stages: usize) -> f64 {
        self.doc.trees[..stages.min(self.doc.trees.len())]
            .iter()
            .fold(self.doc.init_value, |acc, tree| acc + self.doc.learning_rate * tree.predict(row))
    }

    /// Mean squared error on `ds` after 0, 1, ..., `n_trees` stages.
    pub fn staged_mse(&self, ds: &Dataset) -> Result<Vec<f64>> {
        if ds.is_empty() {
            return Err(Error::EmptyDataset);
        }
        ds.rows().iter().try_for_each(|r| check_width(self.doc.feature_names.len(), r))?;
        let mut current = vec![self.doc.init_value; ds.n_rows()];
        let mse = |current: &[f64]| {
            current
                .iter()
                .zip(ds.target())
                .map(|(p, t)| (t - p).powi(2))
                .sum::<f64>()
                / ds.n_rows() as f64
        };
        let mut out = vec![mse(&current)];
        for tree in &self.doc.trees {
            for (p, row) in current.iter_mut().zip(ds.rows()) {
                *p += self.doc.learning_rate * tree.predict(row);
            }
            out.push(mse(&current));
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        Self::try_from(doc)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

impl Predictor for GbrModel {
    fn n_features(&self) -> usize {
        self.doc.feature_names.len()
    }

    fn predict(&self, row: &[f64]) -> Result<f64> {
        check_width(self.doc.feature_names.len(), row)?;
        let mut acc = self.doc.init_value;
        for tree in &self.roots {
            let mut at = tree.root as usize;
            for _ in 0..tree.depth {
                let node = &self.packed[at];
                // NaN compares false and goes right.
                #[allow(clippy::neg_cmp_op_on_partial_ord)]
                let right = !(row[node.feature as usize] <= node.threshold);
                at = node.children[usize::from(right)] as usize;
            }
            acc += self.doc.learning_rate * self.packed[at].value;
        }
        Ok(acc)
    }
}
