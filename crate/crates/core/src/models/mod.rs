//! Three classifier families behind one probabilistic-prediction contract,
//! plus seeded random-search tuning and classification scores.

mod boosted;
mod forest;
mod logistic;
mod persist;
mod tree;
mod tune;

pub use boosted::{train_boosted, BoostedModel, BoostedParams, Objective};
pub use persist::{preprocessing_hash, ModelFile, MODEL_FORMAT_VERSION};
pub use forest::{train_forest, ForestModel, ForestParams, MaxFeatures};
pub use logistic::{loss_and_grad, train_logistic, LogisticModel};
pub use tree::{DecisionTree, TreeNode};
pub use tune::{
    train_with_params, tune, ModelFamily, ModelParams, TrainedModel, TrialResult, TuneOutcome,
    DEFAULT_TRIALS,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::stats;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("feature matrix contains non-finite values")]
    NonFiniteFeatures,
    #[error("target has fewer than 2 classes")]
    DegenerateTarget,
    #[error("labels and rows disagree: {labels} labels for {rows} rows")]
    LengthMismatch { labels: usize, rows: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("min_samples_leaf {min_leaf} needs at least {} rows, got {rows}", 2 * min_leaf)]
    TooFewRows { min_leaf: usize, rows: usize },
}

/// Uniform probabilistic-classifier contract.
///
/// Implementations must return one row per input row, each nonnegative and
/// summing to 1 within 1e-9, and must be deterministic for fixed inputs.
pub trait Predictor: Send + Sync {
    fn n_classes(&self) -> usize;
    fn n_features(&self) -> usize;
    fn predict_proba(&self, x: &Matrix) -> Matrix;

    /// Argmax class per row; ties resolve to the lowest class index.
    fn predict_classes(&self, x: &Matrix) -> Vec<usize> {
        let probs = self.predict_proba(x);
        (0..probs.n_rows()).map(|r| stats::argmax(probs.row(r))).collect()
    }
}

/// Macro-averaged classification scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalScores {
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
}

/// Computes macro precision/recall/F1 and accuracy.
///
/// Classes are `0..K` with `K` inferred from the union of both vectors. A
/// class with no predicted (or true) positives contributes 0 to the macro
/// average rather than poisoning it with a division by zero.
pub fn eval_scores(y_true: &[usize], y_pred: &[usize]) -> Result<EvalScores, ModelError> {
    if y_true.is_empty() {
        return Err(ModelError::EmptyInput);
    }
    if y_true.len() != y_pred.len() {
        return Err(ModelError::LengthMismatch { labels: y_true.len(), rows: y_pred.len() });
    }
    let k = 1 + y_true.iter().chain(y_pred).copied().max().unwrap();
    let mut confusion = vec![vec![0usize; k]; k];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        confusion[t][p] += 1;
    }
    let mut precision = 0.0;
    let mut recall = 0.0;
    let mut f1 = 0.0;
    for (c, row) in confusion.iter().enumerate() {
        let tp = row[c] as f64;
        let predicted: f64 = confusion.iter().map(|t| t[c] as f64).sum();
        let actual: f64 = row.iter().map(|&v| v as f64).sum();
        let p = if predicted > 0.0 { tp / predicted } else { 0.0 };
        let r = if actual > 0.0 { tp / actual } else { 0.0 };
        precision += p;
        recall += r;
        if p + r > 0.0 {
            f1 += 2.0 * p * r / (p + r);
        }
    }
    let kf = k as f64;
    let correct = (0..k).map(|c| confusion[c][c]).sum::<usize>() as f64;
    Ok(EvalScores {
        f1: f1 / kf,
        precision: precision / kf,
        recall: recall / kf,
        accuracy: correct / y_true.len() as f64,
    })
}

pub(crate) fn infer_n_classes(y: &[usize]) -> Result<usize, ModelError> {
    if y.is_empty() {
        return Err(ModelError::EmptyInput);
    }
    let k = 1 + y.iter().copied().max().unwrap();
    if k < 2 {
        return Err(ModelError::DegenerateTarget);
    }
    for c in 0..k {
        if !y.contains(&c) {
            return Err(ModelError::InvalidParam(format!("class {c} has no training rows")));
        }
    }
    Ok(k)
}

pub(crate) fn softmax_row(logits: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in logits.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in logits.iter_mut() {
        *v /= sum;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_prediction_scores_one() {
        let y = vec![0, 1, 2, 1, 0];
        let s = eval_scores(&y, &y).unwrap();
        assert_eq!((s.f1, s.precision, s.recall, s.accuracy), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn binary_confusion_hand_case() {
        // TP=1, FP=1, FN=1, TN=1 for class 1.
        let y_true = vec![1, 1, 0, 0];
        let y_pred = vec![1, 0, 1, 0];
        let s = eval_scores(&y_true, &y_pred).unwrap();
        assert!((s.f1 - 0.5).abs() < 1e-12);
        assert!((s.accuracy - 0.5).abs() < 1e-12);
    }

    #[test]
    fn all_wrong_scores_zero_f1() {
        let s = eval_scores(&[0, 1], &[1, 0]).unwrap();
        assert_eq!(s.f1, 0.0);
        assert_eq!(s.accuracy, 0.0);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(eval_scores(&[], &[]), Err(ModelError::EmptyInput)));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(matches!(
            eval_scores(&[0, 1], &[0]),
            Err(ModelError::LengthMismatch { .. })
        ));
    }
}
