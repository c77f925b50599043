//! CART classification tree with Gini-impurity splits, the base learner for
//! the random forest.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        /// Class distribution of the training rows that reached this leaf.
        probs: Vec<f64>,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: TreeNode,
    pub n_classes: usize,
    pub n_features: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeConfig {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Number of candidate features drawn per node; `None` scans all.
    pub feature_subset: Option<usize>,
}

impl DecisionTree {
    /// Grows a tree on the rows listed in `indices`. The RNG drives the
    /// per-node feature subsets only.
    pub(crate) fn fit(
        x: &Matrix,
        y: &[usize],
        indices: &[usize],
        n_classes: usize,
        config: &TreeConfig,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let root = grow(x, y, indices, n_classes, config, rng, 0);
        Self { root, n_classes, n_features: x.n_cols() }
    }

    pub fn predict_row(&self, row: &[f64]) -> &[f64] {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { probs } => return probs,
                TreeNode::Split { feature, threshold, left, right } => {
                    node = if row[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn max_depth(&self) -> usize {
        fn depth(node: &TreeNode) -> usize {
            match node {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + depth(left).max(depth(right)),
            }
        }
        depth(&self.root)
    }
}

fn grow(
    x: &Matrix,
    y: &[usize],
    indices: &[usize],
    n_classes: usize,
    config: &TreeConfig,
    rng: &mut ChaCha8Rng,
    depth: usize,
) -> TreeNode {
    let counts = class_counts(y, indices, n_classes);
    let n = indices.len();
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    let depth_capped = config.max_depth.is_some_and(|m| depth >= m);
    if pure || depth_capped || n < config.min_samples_split {
        return leaf(&counts, n);
    }

    let candidates = candidate_features(x.n_cols(), config.feature_subset, rng);
    let mut best: Option<(f64, usize, f64)> = None; // (weighted gini, feature, threshold)
    for &feature in &candidates {
        if let Some((gini, threshold)) = best_split_on_feature(x, y, indices, n_classes, feature, config)
        {
            let better = match best {
                None => true,
                Some((bg, _, _)) => gini < bg,
            };
            if better {
                best = Some((gini, feature, threshold));
            }
        }
    }
    let Some((_, feature, threshold)) = best else {
        return leaf(&counts, n);
    };
    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
        indices.iter().partition(|&&i| x.get(i, feature) <= threshold);
    TreeNode::Split {
        feature,
        threshold,
        left: Box::new(grow(x, y, &left_idx, n_classes, config, rng, depth + 1)),
        right: Box::new(grow(x, y, &right_idx, n_classes, config, rng, depth + 1)),
    }
}

/// Scans midpoints between consecutive distinct sorted values, returning the
/// lowest weighted Gini split that honors the leaf-size constraint.
fn best_split_on_feature(
    x: &Matrix,
    y: &[usize],
    indices: &[usize],
    n_classes: usize,
    feature: usize,
    config: &TreeConfig,
) -> Option<(f64, f64)> {
    let mut order: Vec<usize> = indices.to_vec();
    order.sort_by(|&a, &b| {
        x.get(a, feature).partial_cmp(&x.get(b, feature)).expect("finite feature values")
    });
    let n = order.len();
    let mut left_counts = vec![0usize; n_classes];
    let mut right_counts = class_counts(y, &order, n_classes);

    let mut best: Option<(f64, f64)> = None;
    for cut in 1..n {
        let moved = order[cut - 1];
        left_counts[y[moved]] += 1;
        right_counts[y[moved]] -= 1;
        let prev = x.get(order[cut - 1], feature);
        let next = x.get(order[cut], feature);
        if prev == next {
            continue;
        }
        if cut < config.min_samples_leaf || n - cut < config.min_samples_leaf {
            continue;
        }
        let weighted = (cut as f64 * gini(&left_counts, cut)
            + (n - cut) as f64 * gini(&right_counts, n - cut))
            / n as f64;
        let threshold = 0.5 * (prev + next);
        let better = match best {
            None => true,
            Some((bg, _)) => weighted < bg,
        };
        if better {
            best = Some((weighted, threshold));
        }
    }
    best
}

fn candidate_features(
    n_features: usize,
    subset: Option<usize>,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    match subset {
        Some(m) if m < n_features => {
            let mut all: Vec<usize> = (0..n_features).collect();
            let (chosen, _) = all.partial_shuffle(rng, m);
            let mut chosen = chosen.to_vec();
            chosen.sort_unstable();
            chosen
        }
        _ => (0..n_features).collect(),
    }
}

fn class_counts(y: &[usize], indices: &[usize], n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0usize; n_classes];
    for &i in indices {
        counts[y[i]] += 1;
    }
    counts
}

fn gini(counts: &[usize], total: usize) -> f64 {
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

fn leaf(counts: &[usize], total: usize) -> TreeNode {
    let t = total.max(1) as f64;
    TreeNode::Leaf { probs: counts.iter().map(|&c| c as f64 / t).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn full_config() -> TreeConfig {
        TreeConfig {
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            feature_subset: None,
        }
    }

    #[test]
    fn memorizes_distinct_rows() {
        let x = Matrix::from_rows(vec![
            vec![-4.0, 1.0],
            vec![-3.0, 0.0],
            vec![-1.0, 1.0],
            vec![1.0, 0.0],
            vec![2.0, 1.0],
            vec![4.0, 0.0],
        ]);
        let y = vec![0, 0, 0, 1, 1, 2];
        let indices: Vec<usize> = (0..6).collect();
        let mut r = rng::stream(1);
        let tree = DecisionTree::fit(&x, &y, &indices, 3, &full_config(), &mut r);
        for (i, &label) in y.iter().enumerate() {
            let probs = tree.predict_row(x.row(i));
            assert_eq!(crate::stats::argmax(probs), label);
            assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn respects_max_depth() {
        let x = Matrix::from_rows((0..32).map(|i| vec![i as f64]).collect());
        let y: Vec<usize> = (0..32).map(|i| (i / 2) % 2).collect();
        let indices: Vec<usize> = (0..32).collect();
        let config = TreeConfig { max_depth: Some(3), ..full_config() };
        let mut r = rng::stream(2);
        let tree = DecisionTree::fit(&x, &y, &indices, 2, &config, &mut r);
        assert!(tree.max_depth() <= 3);
    }

    #[test]
    fn min_leaf_blocks_unbalanced_cuts() {
        let x = Matrix::from_rows(vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]]);
        let y = vec![0, 1, 1, 1];
        let config = TreeConfig { min_samples_leaf: 2, ..full_config() };
        let mut r = rng::stream(3);
        let tree = DecisionTree::fit(&x, &y, &[0, 1, 2, 3], 2, &config, &mut r);
        // The only Gini-improving cut (0|123) is forbidden, so both children
        // of any split must hold >= 2 rows; with these labels the best legal
        // cut is (01|23).
        match &tree.root {
            TreeNode::Split { threshold, .. } => assert!((*threshold - 1.5).abs() < 1e-12),
            TreeNode::Leaf { .. } => panic!("expected a split"),
        }
    }
}
