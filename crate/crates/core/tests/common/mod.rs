//! Test doubles shared by the integration suites.
//!
//! Each test binary uses its own subset.
#![allow(dead_code)]

use rand::Rng;
use xaieval_core::matrix::Matrix;
use xaieval_core::models::Predictor;
use xaieval_core::rng;

/// Class-0 score affine in the inputs; class 1 strictly below, pinning the
/// argmax to class 0.
pub struct AffineModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl Predictor for AffineModel {
    fn n_classes(&self) -> usize {
        2
    }

    fn n_features(&self) -> usize {
        self.weights.len()
    }

    fn predict_proba(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.n_rows(), 2);
        for r in 0..x.n_rows() {
            let score: f64 = self.intercept
                + x.row(r).iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>();
            out.set(r, 0, score);
            out.set(r, 1, score - 1.0);
        }
        out
    }
}

/// Always returns the same class-0 probability.
pub struct ConstantModel {
    pub d: usize,
    pub value: f64,
}

impl Predictor for ConstantModel {
    fn n_classes(&self) -> usize {
        2
    }

    fn n_features(&self) -> usize {
        self.d
    }

    fn predict_proba(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.n_rows(), 2);
        for r in 0..x.n_rows() {
            out.set(r, 0, self.value);
            out.set(r, 1, 1.0 - self.value);
        }
        out
    }
}

/// A seeded one-hidden-layer scoring model: smooth, nonlinear, bounded.
/// Class 0 gets `sigmoid(w2 . tanh(W1 x + b1))`, class 1 the complement.
pub struct RandomSmoothModel {
    w1: Vec<Vec<f64>>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    d: usize,
}

impl RandomSmoothModel {
    pub fn new(d: usize, seed: u64) -> Self {
        let hidden = 6;
        let mut stream = rng::stream(rng::derive(seed, &[rng::hash_str("smooth-model")]));
        let mut draw = |scale: f64| stream.random_range(-scale..scale);
        let w1 = (0..hidden).map(|_| (0..d).map(|_| draw(1.5)).collect()).collect();
        let b1 = (0..hidden).map(|_| draw(0.5)).collect();
        let w2 = (0..hidden).map(|_| draw(2.0)).collect();
        Self { w1, b1, w2, d }
    }
}

impl Predictor for RandomSmoothModel {
    fn n_classes(&self) -> usize {
        2
    }

    fn n_features(&self) -> usize {
        self.d
    }

    fn predict_proba(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.n_rows(), 2);
        for r in 0..x.n_rows() {
            let row = x.row(r);
            let mut score = 0.0;
            for h in 0..self.w1.len() {
                let z: f64 =
                    self.w1[h].iter().zip(row).map(|(w, v)| w * v).sum::<f64>() + self.b1[h];
                score += self.w2[h] * z.tanh();
            }
            let p = 1.0 / (1.0 + (-score).exp());
            out.set(r, 0, p);
            out.set(r, 1, 1.0 - p);
        }
        out
    }
}
