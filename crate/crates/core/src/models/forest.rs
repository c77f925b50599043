//! Random forest: bootstrap-resampled Gini trees with per-node feature
//! subsets, averaged into a probability forecast.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, TreeConfig};
use super::{infer_n_classes, ModelError, Predictor};
use crate::matrix::Matrix;
use crate::{exec, rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// ceil(sqrt(d)) candidate features per node.
    Sqrt,
    /// Fixed candidate count, capped at d.
    Fixed(usize),
    /// Every feature at every node.
    All,
}

impl MaxFeatures {
    fn resolve(&self, d: usize) -> Option<usize> {
        match self {
            MaxFeatures::Sqrt => Some(((d as f64).sqrt().ceil() as usize).min(d)),
            MaxFeatures::Fixed(m) => Some((*m).min(d)),
            MaxFeatures::All => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub max_features: MaxFeatures,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// When false each tree sees every training row; bootstrap resampling
    /// cannot guarantee full coverage, so memorization-style fits need this
    /// off.
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            max_features: MaxFeatures::Sqrt,
            min_samples_split: 2,
            min_samples_leaf: 1,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<DecisionTree>,
    pub tree_seeds: Vec<u64>,
    pub params: ForestParams,
    pub n_classes: usize,
    pub n_features: usize,
}

impl Predictor for ForestModel {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_proba(&self, x: &Matrix) -> Matrix {
        let k = self.n_classes;
        let mut out = Matrix::zeros(x.n_rows(), k);
        let scale = 1.0 / self.trees.len().max(1) as f64;
        for r in 0..x.n_rows() {
            let row = x.row(r);
            let acc = out.row_mut(r);
            for tree in &self.trees {
                for (a, p) in acc.iter_mut().zip(tree.predict_row(row)) {
                    *a += p * scale;
                }
            }
        }
        out
    }
}

/// Trains `params.n_trees` trees, each on its own seeded bootstrap resample.
/// Per-tree seeds derive from `(seed, tree index)`, so parallel training is
/// order-independent.
pub fn train_forest(
    x: &Matrix,
    y: &[usize],
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel, ModelError> {
    if !x.is_finite() {
        return Err(ModelError::NonFiniteFeatures);
    }
    if x.n_rows() != y.len() {
        return Err(ModelError::LengthMismatch { labels: y.len(), rows: x.n_rows() });
    }
    if params.n_trees == 0 {
        return Err(ModelError::InvalidParam("n_trees must be >= 1".into()));
    }
    let n = x.n_rows();
    if params.min_samples_leaf * 2 > n {
        return Err(ModelError::TooFewRows { min_leaf: params.min_samples_leaf, rows: n });
    }
    let n_classes = infer_n_classes(y)?;
    let config = TreeConfig {
        max_depth: params.max_depth,
        min_samples_split: params.min_samples_split,
        min_samples_leaf: params.min_samples_leaf,
        feature_subset: params.max_features.resolve(x.n_cols()),
    };

    let tree_seeds: Vec<u64> =
        (0..params.n_trees).map(|t| rng::derive(seed, &[rng::hash_str("tree"), t as u64])).collect();
    let trees = exec::map_slice(&tree_seeds, |&tree_seed| {
        let mut stream = rng::stream(tree_seed);
        let indices: Vec<usize> = if params.bootstrap {
            (0..n).map(|_| stream.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        DecisionTree::fit(x, y, &indices, n_classes, &config, &mut stream)
    });

    Ok(ForestModel { trees, tree_seeds, params: *params, n_classes, n_features: x.n_cols() })
}
