use serde::{Deserialize, Serialize};

use crate::stats::RunningStats;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    /// Rows with `row[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// A binary regression tree stored as a flat node array rooted at index 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    /// Length (in edges) of the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Checks child links point forward inside the array and split features
    /// are below `n_features`.
    pub(crate) fn validate(&self, n_features: usize) -> Result<(), String> {
        if self.nodes.is_empty() {
            return Err("tree has no nodes".into());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            match *node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if feature >= n_features {
                        return Err(format!("node {i} splits on feature {feature}"));
                    }
                    if !threshold.is_finite() {
                        return Err(format!("node {i} has a non-finite threshold"));
                    }
                    if left <= i || right <= i || left >= self.nodes.len() || right >= self.nodes.len() {
                        return Err(format!("node {i} has invalid children"));
                    }
                }
                Node::Leaf { value } if !value.is_finite() => {
                    return Err(format!("leaf {i} has a non-finite value"));
                }
                Node::Leaf { .. } => {}
            }
        }
        Ok(())
    }
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Exact greedy least-squares tree growth over a fixed feature matrix.
///
/// Sample orderings per feature are sorted once and then stably partitioned
/// down the tree, so each node scans its samples in feature order without
/// re-sorting.
pub(crate) struct TreeBuilder<'a> {
    columns: &'a [Vec<f64>],
    sorted: Vec<Vec<u32>>,
    max_depth: usize,
    min_samples_leaf: usize,
}

impl<'a> TreeBuilder<'a> {
    pub(crate) fn new(columns: &'a [Vec<f64>], max_depth: usize, min_samples_leaf: usize) -> Self {
        let sorted = columns
            .iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..col.len() as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
                idx
            })
            .collect();
        Self {
            columns,
            sorted,
            max_depth,
            min_samples_leaf,
        }
    }

    pub(crate) fn fit(&self, residuals: &[f64]) -> RegressionTree {
        let mut nodes = Vec::new();
        let mut go_left = vec![false; residuals.len()];
        self.grow(self.sorted.clone(), residuals, 0, &mut nodes, &mut go_left);
        RegressionTree { nodes }
    }

    fn grow(
        &self,
        sorted: Vec<Vec<u32>>,
        residuals: &[f64],
        depth: usize,
        nodes: &mut Vec<Node>,
        go_left: &mut [bool],
    ) -> usize {
        let at = nodes.len();
        let members = &sorted[0];
        let value = RunningStats::from_iter(members.iter().map(|&i| residuals[i as usize]))
            .mean()
            .unwrap_or(0.0);
        nodes.push(Node::Leaf { value });

        let n = members.len();
        if depth >= self.max_depth || n < 2 * self.min_samples_leaf.max(1) {
            return at;
        }
        let Some(best) = self.best_split(&sorted, residuals) else {
            return at;
        };

        for &i in &sorted[best.feature] {
            go_left[i as usize] = self.columns[best.feature][i as usize] <= best.threshold;
        }
        let (left, right): (Vec<Vec<u32>>, Vec<Vec<u32>>) = sorted
            .into_iter()
            .map(|order| order.into_iter().partition(|&i| go_left[i as usize]))
            .unzip();

        let l = self.grow(left, residuals, depth + 1, nodes, go_left);
        let r = self.grow(right, residuals, depth + 1, nodes, go_left);
        nodes[at] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: l,
            right: r,
        };
        at
    }

    // Ties keep the first candidate seen: lowest feature, then lowest threshold.
    fn best_split(&self, sorted: &[Vec<u32>], residuals: &[f64]) -> Option<Candidate> {
        let n = sorted[0].len();
        let total: f64 = sorted[0].iter().map(|&i| residuals[i as usize]).sum();
        let parent = total * total / n as f64;
        let min_leaf = self.min_samples_leaf.max(1);
        let mut best: Option<Candidate> = None;

        for (feature, order) in sorted.iter().enumerate() {
            let col = &self.columns[feature];
            let mut left_sum = 0.0;
            for k in 0..n - 1 {
                let i = order[k] as usize;
                left_sum += residuals[i];
                let n_left = k + 1;
                let n_right = n - n_left;
                if n_left < min_leaf || n_right < min_leaf {
                    continue;
                }
                let (a, b) = (col[i], col[order[k + 1] as usize]);
                if a >= b {
                    continue;
                }
                let right_sum = total - left_sum;
                let gain = left_sum * left_sum / n_left as f64
                    + right_sum * right_sum / n_right as f64
                    - parent;
                if gain > best.as_ref().map_or(0.0, |c| c.gain) {
                    let mut threshold = a + (b - a) / 2.0;
                    if threshold >= b {
                        threshold = a;
                    }
                    best = Some(Candidate {
                        feature,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best
    }
}
