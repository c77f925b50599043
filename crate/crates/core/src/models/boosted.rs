//! Gradient-boosted regression trees with second-order leaf weights on
//! logistic (binary) or softmax (multiclass) loss.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{infer_n_classes, softmax_row, ModelError, Predictor};
use crate::matrix::Matrix;
use crate::rng;

/// L2 regularization on leaf weights.
const LAMBDA: f64 = 1.0;
/// Minimum hessian mass per child for a split to be admissible.
const MIN_CHILD_WEIGHT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    BinaryLogistic,
    Softmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostedParams {
    pub max_depth: usize,
    pub learning_rate: f64,
    pub n_trees: usize,
    pub subsample: f64,
    pub colsample: f64,
}

impl Default for BoostedParams {
    fn default() -> Self {
        Self { max_depth: 3, learning_rate: 0.05, n_trees: 100, subsample: 1.0, colsample: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum RegNode {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: Box<RegNode>, right: Box<RegNode> },
}

impl RegNode {
    fn predict(&self, row: &[f64]) -> f64 {
        match self {
            RegNode::Leaf { value } => *value,
            RegNode::Split { feature, threshold, left, right } => {
                if row[*feature] <= *threshold {
                    left.predict(row)
                } else {
                    right.predict(row)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoostedModel {
    /// Log class priors: one entry for binary (log-odds), K for softmax.
    pub base_scores: Vec<f64>,
    /// rounds[r][m] is round r's tree for score column m.
    pub rounds: Vec<Vec<RegNode>>,
    pub learning_rate: f64,
    pub objective: Objective,
    pub n_classes: usize,
    pub n_features: usize,
    /// Mean training log-loss before boosting and after each round.
    pub train_losses: Vec<f64>,
}

impl BoostedModel {
    fn scores_for(&self, row: &[f64]) -> Vec<f64> {
        let mut scores = self.base_scores.clone();
        for round in &self.rounds {
            for (s, tree) in scores.iter_mut().zip(round) {
                *s += self.learning_rate * tree.predict(row);
            }
        }
        scores
    }
}

impl Predictor for BoostedModel {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_proba(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.n_rows(), self.n_classes);
        for r in 0..x.n_rows() {
            let scores = self.scores_for(x.row(r));
            match self.objective {
                Objective::BinaryLogistic => {
                    let p1 = sigmoid(scores[0]);
                    out.set(r, 0, 1.0 - p1);
                    out.set(r, 1, p1);
                }
                Objective::Softmax => {
                    let probs = out.row_mut(r);
                    probs.copy_from_slice(&scores);
                    softmax_row(probs);
                }
            }
        }
        out
    }
}

/// Boosts `params.n_trees` rounds. Row and column subsets are drawn once per
/// round from `(seed, round)`, shared by that round's class trees.
pub fn train_boosted(
    x: &Matrix,
    y: &[usize],
    params: &BoostedParams,
    seed: u64,
) -> Result<BoostedModel, ModelError> {
    if !x.is_finite() {
        return Err(ModelError::NonFiniteFeatures);
    }
    if x.n_rows() != y.len() {
        return Err(ModelError::LengthMismatch { labels: y.len(), rows: x.n_rows() });
    }
    if !(params.learning_rate > 0.0 && params.learning_rate <= 1.0) {
        return Err(ModelError::InvalidParam(format!(
            "learning_rate must be in (0, 1], got {}",
            params.learning_rate
        )));
    }
    for (name, v) in [("subsample", params.subsample), ("colsample", params.colsample)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(ModelError::InvalidParam(format!("{name} must be in (0, 1], got {v}")));
        }
    }
    if params.max_depth == 0 {
        return Err(ModelError::InvalidParam("max_depth must be >= 1".into()));
    }
    let n_classes = infer_n_classes(y)?;
    let n = x.n_rows();
    let d = x.n_cols();
    let objective =
        if n_classes == 2 { Objective::BinaryLogistic } else { Objective::Softmax };
    let n_score_cols = match objective {
        Objective::BinaryLogistic => 1,
        Objective::Softmax => n_classes,
    };

    let mut priors = vec![0.0f64; n_classes];
    for &label in y {
        priors[label] += 1.0 / n as f64;
    }
    let base_scores = match objective {
        Objective::BinaryLogistic => vec![(priors[1] / priors[0]).ln()],
        Objective::Softmax => priors.iter().map(|p| p.ln()).collect(),
    };

    // scores[i][m]: current margin of row i for score column m.
    let mut scores = vec![base_scores.clone(); n];
    let mut rounds = Vec::with_capacity(params.n_trees);
    let mut train_losses = Vec::with_capacity(params.n_trees + 1);
    train_losses.push(mean_log_loss(&scores, y, objective));

    for round in 0..params.n_trees {
        let mut round_rng = rng::stream(rng::derive(seed, &[rng::hash_str("round"), round as u64]));
        let rows = sample_subset(n, params.subsample, &mut round_rng);
        let cols = sample_subset(d, params.colsample, &mut round_rng);

        // Gradients for every class come from the scores entering this round.
        let probs: Vec<Vec<f64>> = scores.iter().map(|s| to_probs(s, objective)).collect();
        let mut round_trees = Vec::with_capacity(n_score_cols);
        for m in 0..n_score_cols {
            let (grad, hess): (Vec<f64>, Vec<f64>) = (0..n)
                .map(|i| match objective {
                    Objective::BinaryLogistic => {
                        let p = probs[i][1];
                        (p - if y[i] == 1 { 1.0 } else { 0.0 }, (p * (1.0 - p)).max(1e-16))
                    }
                    Objective::Softmax => {
                        let p = probs[i][m];
                        (p - if y[i] == m { 1.0 } else { 0.0 }, (p * (1.0 - p)).max(1e-16))
                    }
                })
                .unzip();
            let tree = grow_reg_tree(x, &rows, &cols, &grad, &hess, params.max_depth, 0);
            for (i, row_scores) in scores.iter_mut().enumerate() {
                row_scores[m] += params.learning_rate * tree.predict(x.row(i));
            }
            round_trees.push(tree);
        }
        rounds.push(round_trees);
        train_losses.push(mean_log_loss(&scores, y, objective));
    }

    Ok(BoostedModel {
        base_scores,
        rounds,
        learning_rate: params.learning_rate,
        objective,
        n_classes,
        n_features: d,
        train_losses,
    })
}

fn grow_reg_tree(
    x: &Matrix,
    rows: &[usize],
    cols: &[usize],
    grad: &[f64],
    hess: &[f64],
    max_depth: usize,
    depth: usize,
) -> RegNode {
    let g_total: f64 = rows.iter().map(|&i| grad[i]).sum();
    let h_total: f64 = rows.iter().map(|&i| hess[i]).sum();
    if depth >= max_depth || rows.len() < 2 {
        return RegNode::Leaf { value: -g_total / (h_total + LAMBDA) };
    }

    let parent_score = g_total * g_total / (h_total + LAMBDA);
    let mut best: Option<(f64, usize, f64)> = None; // (gain, feature, threshold)
    for &feature in cols {
        let mut order: Vec<usize> = rows.to_vec();
        order.sort_by(|&a, &b| {
            x.get(a, feature).partial_cmp(&x.get(b, feature)).expect("finite features")
        });
        let mut g_left = 0.0;
        let mut h_left = 0.0;
        for cut in 1..order.len() {
            g_left += grad[order[cut - 1]];
            h_left += hess[order[cut - 1]];
            let prev = x.get(order[cut - 1], feature);
            let next = x.get(order[cut], feature);
            if prev == next {
                continue;
            }
            let h_right = h_total - h_left;
            if h_left < MIN_CHILD_WEIGHT || h_right < MIN_CHILD_WEIGHT {
                continue;
            }
            let g_right = g_total - g_left;
            let gain = 0.5
                * (g_left * g_left / (h_left + LAMBDA) + g_right * g_right / (h_right + LAMBDA)
                    - parent_score);
            if gain > 0.0 && best.is_none_or(|(bg, _, _)| gain > bg) {
                best = Some((gain, feature, 0.5 * (prev + next)));
            }
        }
    }
    let Some((_, feature, threshold)) = best else {
        return RegNode::Leaf { value: -g_total / (h_total + LAMBDA) };
    };
    let (left, right): (Vec<usize>, Vec<usize>) =
        rows.iter().partition(|&&i| x.get(i, feature) <= threshold);
    RegNode::Split {
        feature,
        threshold,
        left: Box::new(grow_reg_tree(x, &left, cols, grad, hess, max_depth, depth + 1)),
        right: Box::new(grow_reg_tree(x, &right, cols, grad, hess, max_depth, depth + 1)),
    }
}

fn sample_subset(total: usize, fraction: f64, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<usize> {
    if fraction >= 1.0 {
        return (0..total).collect();
    }
    let count = ((fraction * total as f64).round() as usize).clamp(1, total);
    let mut all: Vec<usize> = (0..total).collect();
    let (chosen, _) = all.partial_shuffle(rng, count);
    let mut chosen = chosen.to_vec();
    chosen.sort_unstable();
    chosen
}

fn to_probs(scores: &[f64], objective: Objective) -> Vec<f64> {
    match objective {
        Objective::BinaryLogistic => {
            let p1 = sigmoid(scores[0]);
            vec![1.0 - p1, p1]
        }
        Objective::Softmax => {
            let mut probs = scores.to_vec();
            softmax_row(&mut probs);
            probs
        }
    }
}

fn mean_log_loss(scores: &[Vec<f64>], y: &[usize], objective: Objective) -> f64 {
    let total: f64 = scores
        .iter()
        .zip(y)
        .map(|(s, &label)| -to_probs(s, objective)[label].max(f64::MIN_POSITIVE).ln())
        .sum();
    total / y.len() as f64
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}
