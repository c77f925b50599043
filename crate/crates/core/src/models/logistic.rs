//! L2-regularized multinomial logistic regression trained by full-batch
//! gradient descent with backtracking line search.

use serde::{Deserialize, Serialize};

use super::{infer_n_classes, softmax_row, ModelError, Predictor};
use crate::matrix::Matrix;

const GRAD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogisticModel {
    /// K×d weight rows.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub c_reg: f64,
}

impl Predictor for LogisticModel {
    fn n_classes(&self) -> usize {
        self.weights.len()
    }

    fn n_features(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    fn predict_proba(&self, x: &Matrix) -> Matrix {
        let k = self.n_classes();
        let mut out = Matrix::zeros(x.n_rows(), k);
        for r in 0..x.n_rows() {
            let row = x.row(r);
            let logits = out.row_mut(r);
            for (c, (w, b)) in self.weights.iter().zip(&self.bias).enumerate() {
                logits[c] = dot(w, row) + b;
            }
            softmax_row(logits);
        }
        out
    }
}

/// Objective and gradient of the regularized negative log-likelihood:
/// `-Σ ln p(y_i | x_i) + ‖W‖² / (2C)`. Bias terms are unpenalized.
///
/// Public so independent finite-difference checks can probe the same surface
/// the optimizer descends.
pub fn loss_and_grad(
    weights: &[Vec<f64>],
    bias: &[f64],
    x: &Matrix,
    y: &[usize],
    c_reg: f64,
) -> (f64, Vec<Vec<f64>>, Vec<f64>) {
    let k = weights.len();
    let d = x.n_cols();
    let mut loss = 0.0;
    let mut grad_w = vec![vec![0.0; d]; k];
    let mut grad_b = vec![0.0; k];
    let mut logits = vec![0.0; k];
    for (r, &label) in y.iter().enumerate() {
        let row = x.row(r);
        for c in 0..k {
            logits[c] = dot(&weights[c], row) + bias[c];
        }
        softmax_row(&mut logits);
        loss -= logits[label].max(f64::MIN_POSITIVE).ln();
        for c in 0..k {
            let residual = logits[c] - if c == label { 1.0 } else { 0.0 };
            grad_b[c] += residual;
            for (g, v) in grad_w[c].iter_mut().zip(row) {
                *g += residual * v;
            }
        }
    }
    for (gw, w) in grad_w.iter_mut().zip(weights) {
        for (g, v) in gw.iter_mut().zip(w) {
            loss += v * v / (2.0 * c_reg);
            *g += v / c_reg;
        }
    }
    (loss, grad_w, grad_b)
}

/// Trains until the gradient ∞-norm drops below 1e-6 or `max_iter` steps.
pub fn train_logistic(
    x: &Matrix,
    y: &[usize],
    c_reg: f64,
    max_iter: usize,
) -> Result<LogisticModel, ModelError> {
    if c_reg <= 0.0 {
        return Err(ModelError::InvalidParam(format!("C must be positive, got {c_reg}")));
    }
    if !x.is_finite() {
        return Err(ModelError::NonFiniteFeatures);
    }
    if x.n_rows() != y.len() {
        return Err(ModelError::LengthMismatch { labels: y.len(), rows: x.n_rows() });
    }
    let k = infer_n_classes(y)?;
    let d = x.n_cols();

    let mut weights = vec![vec![0.0; d]; k];
    let mut bias = vec![0.0; k];
    let mut step = 1.0;
    let (mut loss, mut grad_w, mut grad_b) = loss_and_grad(&weights, &bias, x, y, c_reg);
    for _ in 0..max_iter {
        let inf_norm = grad_inf_norm(&grad_w, &grad_b);
        if inf_norm < GRAD_TOL {
            break;
        }
        let grad_sq: f64 = grad_w.iter().flatten().map(|g| g * g).sum::<f64>()
            + grad_b.iter().map(|g| g * g).sum::<f64>();

        // Backtracking Armijo search, warm-started from twice the last step.
        step *= 2.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand_w: Vec<Vec<f64>> = weights
                .iter()
                .zip(&grad_w)
                .map(|(w, g)| w.iter().zip(g).map(|(v, gv)| v - step * gv).collect())
                .collect();
            let cand_b: Vec<f64> =
                bias.iter().zip(&grad_b).map(|(v, g)| v - step * g).collect();
            let (cand_loss, cand_gw, cand_gb) = loss_and_grad(&cand_w, &cand_b, x, y, c_reg);
            if cand_loss <= loss - 1e-4 * step * grad_sq {
                weights = cand_w;
                bias = cand_b;
                loss = cand_loss;
                grad_w = cand_gw;
                grad_b = cand_gb;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break; // step underflowed; gradient is numerically flat
        }
    }
    Ok(LogisticModel { weights, bias, c_reg })
}

fn grad_inf_norm(grad_w: &[Vec<f64>], grad_b: &[f64]) -> f64 {
    grad_w
        .iter()
        .flatten()
        .chain(grad_b)
        .fold(0.0f64, |acc, g| acc.max(g.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable() -> (Matrix, Vec<usize>) {
        let x = Matrix::from_rows(vec![
            vec![-2.0, -1.5],
            vec![-1.5, -2.0],
            vec![-1.0, -1.0],
            vec![1.0, 1.5],
            vec![1.5, 1.0],
            vec![2.0, 2.0],
        ]);
        (x, vec![0, 0, 0, 1, 1, 1])
    }

    #[test]
    fn separable_data_reaches_full_accuracy() {
        let (x, y) = separable();
        let model = train_logistic(&x, &y, 10.0, 1000).unwrap();
        assert_eq!(model.predict_classes(&x), y);
    }

    #[test]
    fn constant_zero_feature_gets_zero_weight() {
        let x = Matrix::from_rows(vec![
            vec![-2.0, 0.0],
            vec![-1.0, 0.0],
            vec![1.0, 0.0],
            vec![2.0, 0.0],
        ]);
        let y = vec![0, 0, 1, 1];
        let model = train_logistic(&x, &y, 1.0, 1000).unwrap();
        for w in &model.weights {
            assert!(w[1].abs() < 1e-6, "dead feature weight {}", w[1]);
        }
    }

    #[test]
    fn single_class_is_an_error() {
        let x = Matrix::from_rows(vec![vec![1.0], vec![2.0]]);
        assert!(matches!(
            train_logistic(&x, &[0, 0], 1.0, 10),
            Err(ModelError::DegenerateTarget)
        ));
    }

    #[test]
    fn non_finite_features_are_an_error() {
        let x = Matrix::from_rows(vec![vec![f64::NAN], vec![1.0]]);
        assert!(matches!(
            train_logistic(&x, &[0, 1], 1.0, 10),
            Err(ModelError::NonFiniteFeatures)
        ));
    }

    #[test]
    fn gradient_matches_central_differences() {
        let x = Matrix::from_rows(vec![
            vec![0.3, -1.2, 0.7],
            vec![-0.5, 0.9, 0.1],
            vec![1.1, 0.4, -0.8],
            vec![-0.2, -0.6, 1.3],
        ]);
        let y = vec![0, 1, 2, 1];
        let weights = vec![
            vec![0.1, -0.2, 0.3],
            vec![-0.4, 0.5, 0.0],
            vec![0.2, 0.1, -0.3],
        ];
        let bias = vec![0.05, -0.1, 0.0];
        let c_reg = 2.0;
        let (_, grad_w, grad_b) = loss_and_grad(&weights, &bias, &x, &y, c_reg);
        let h = 1e-6;
        for ci in 0..3 {
            for di in 0..3 {
                let mut wp = weights.clone();
                let mut wm = weights.clone();
                wp[ci][di] += h;
                wm[ci][di] -= h;
                let (lp, _, _) = loss_and_grad(&wp, &bias, &x, &y, c_reg);
                let (lm, _, _) = loss_and_grad(&wm, &bias, &x, &y, c_reg);
                let fd = (lp - lm) / (2.0 * h);
                let rel = (grad_w[ci][di] - fd).abs() / fd.abs().max(1.0);
                assert!(rel < 1e-5, "w[{ci}][{di}]: analytic {} vs fd {fd}", grad_w[ci][di]);
            }
            let mut bp = bias.clone();
            let mut bm = bias.clone();
            bp[ci] += h;
            bm[ci] -= h;
            let (lp, _, _) = loss_and_grad(&weights, &bp, &x, &y, c_reg);
            let (lm, _, _) = loss_and_grad(&weights, &bm, &x, &y, c_reg);
            let fd = (lp - lm) / (2.0 * h);
            assert!((grad_b[ci] - fd).abs() / fd.abs().max(1.0) < 1e-5);
        }
    }

    #[test]
    fn probability_rows_sum_to_one() {
        let (x, y) = separable();
        let model = train_logistic(&x, &y, 1.0, 200).unwrap();
        let probs = model.predict_proba(&x);
        for r in 0..probs.n_rows() {
            let sum: f64 = probs.row(r).iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(probs.row(r).iter().all(|&p| p >= 0.0));
        }
    }
}
