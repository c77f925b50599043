//! Kernel SHAP: Shapley values through a weighted least-squares fit over
//! feature coalitions, with the efficiency constraint eliminated exactly.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{check_sample, solve, Attribution, ExplainError, Technique};
use crate::matrix::Matrix;
use crate::models::Predictor;
use crate::rng;
use crate::stats;

/// Enumerate all coalitions whenever `2^d` stays within this budget.
const ENUMERATION_BUDGET: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapMode {
    /// Enumerate when affordable, otherwise sample.
    Auto,
    Enumerate,
    Sample,
}

/// Kernel SHAP with automatic mode selection.
pub fn explain_kernel_shap(
    model: &dyn Predictor,
    x: &[f64],
    baseline: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<Attribution, ExplainError> {
    explain_kernel_shap_mode(model, x, baseline, n_samples, seed, ShapMode::Auto)
}

/// Kernel SHAP with the coalition strategy pinned.
///
/// Masked inputs take coordinates in the coalition from `x` and the rest from
/// `baseline`. Enumeration scores every proper nonempty coalition with the
/// Shapley kernel weight `(d-1) / (C(d,s) * s * (d-s))`; sampling draws
/// coalition sizes proportional to the kernel mass per size and members
/// uniformly. The returned values satisfy
/// `sum(values) = f_c(x) - f_c(baseline)` by constraint elimination.
pub fn explain_kernel_shap_mode(
    model: &dyn Predictor,
    x: &[f64],
    baseline: &[f64],
    n_samples: usize,
    seed: u64,
    mode: ShapMode,
) -> Result<Attribution, ExplainError> {
    check_sample(model, x)?;
    if baseline.len() != x.len() {
        return Err(ExplainError::DimensionMismatch { expected: x.len(), got: baseline.len() });
    }
    let d = x.len();
    if d == 0 {
        return Err(ExplainError::ZeroFeatures);
    }

    let endpoint_probs =
        model.predict_proba(&Matrix::from_rows(vec![x.to_vec(), baseline.to_vec()]));
    let class = stats::argmax(endpoint_probs.row(0));
    let fx = endpoint_probs.get(0, class);
    let f0 = endpoint_probs.get(1, class);
    let delta = fx - f0;

    let mut note = None;
    let values = if d == 1 {
        vec![delta]
    } else {
        let enumerate = match mode {
            ShapMode::Auto => (1u64 << d.min(63)) <= ENUMERATION_BUDGET,
            ShapMode::Enumerate if d > 20 => {
                return Err(ExplainError::InvalidConfig(format!(
                    "forced enumeration over 2^{d} coalitions is intractable"
                )))
            }
            ShapMode::Enumerate => true,
            ShapMode::Sample => false,
        };
        let coalitions = if enumerate {
            enumerate_coalitions(d)
        } else {
            sample_coalitions(d, n_samples, seed)
        };

        let rows: Vec<Vec<f64>> =
            coalitions.iter().map(|(members, _)| masked_row(x, baseline, members)).collect();
        let outputs = model.predict_proba(&Matrix::from_rows(rows));

        // Eliminate phi_d via the efficiency constraint: regress
        // v(S) - f0 - z_d * delta on columns (z_i - z_d), i < d.
        let mut design_rows = Vec::with_capacity(coalitions.len());
        let mut targets = Vec::with_capacity(coalitions.len());
        let mut weights = Vec::with_capacity(coalitions.len());
        for (j, (members, weight)) in coalitions.iter().enumerate() {
            let z_last = f64::from(members.contains(&(d - 1)));
            let mut row = vec![-z_last; d - 1];
            for &i in members {
                if i < d - 1 {
                    row[i] += 1.0;
                }
            }
            design_rows.push(row);
            targets.push(outputs.get(j, class) - f0 - z_last * delta);
            weights.push(*weight);
        }
        let design = Matrix::from_rows(design_rows);
        match solve::weighted_least_squares(&design, &targets, &weights) {
            Some(mut head) => {
                let sum_head: f64 = head.iter().sum();
                head.push(delta - sum_head);
                head
            }
            None => {
                // Degenerate system (e.g. constant masked outputs with too few
                // distinct coalitions): fall back to spreading the efficiency
                // gap uniformly and flag the attribution.
                log::warn!("kernel shap normal equations singular; efficiency-only fallback");
                note = Some("efficiency-only-fallback".to_string());
                vec![delta / d as f64; d]
            }
        }
    };

    Ok(Attribution {
        values,
        explained_class: class,
        technique: Technique::KernelShap,
        sample_id: 0,
        config_fingerprint: format!("{:016x}", rng::hash_str(&format!("kernel_shap;n={n_samples};seed={seed}"))),
        note,
    })
}

fn masked_row(x: &[f64], baseline: &[f64], members: &[usize]) -> Vec<f64> {
    let mut row = baseline.to_vec();
    for &i in members {
        row[i] = x[i];
    }
    row
}

/// Shapley kernel weight for a coalition of size `s` out of `d` features.
fn kernel_weight(d: usize, s: usize) -> f64 {
    (d as f64 - 1.0) / (binomial(d, s) * s as f64 * (d - s) as f64)
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

fn enumerate_coalitions(d: usize) -> Vec<(Vec<usize>, f64)> {
    let full: u32 = (1u32 << d) - 1;
    (1..full)
        .map(|mask| {
            let members: Vec<usize> = (0..d).filter(|i| mask & (1 << i) != 0).collect();
            let weight = kernel_weight(d, members.len());
            (members, weight)
        })
        .collect()
}

/// Coalition sizes follow the kernel mass `sum_{|S|=s} w(s) ∝ 1/(s(d-s))`;
/// members are uniform given the size. Sampled rows carry unit weight because
/// the kernel is already absorbed by the sampling distribution.
fn sample_coalitions(d: usize, n_samples: usize, seed: u64) -> Vec<(Vec<usize>, f64)> {
    let mut stream = rng::stream(rng::derive(seed, &[rng::hash_str("coalitions")]));
    let masses: Vec<f64> = (1..d).map(|s| 1.0 / (s as f64 * (d - s) as f64)).collect();
    let total: f64 = masses.iter().sum();

    (0..n_samples.max(1))
        .map(|_| {
            let mut u = stream.random::<f64>() * total;
            let mut size = 1;
            for (idx, mass) in masses.iter().enumerate() {
                if u < *mass || idx == masses.len() - 1 {
                    size = idx + 1;
                    break;
                }
                u -= mass;
            }
            let mut all: Vec<usize> = (0..d).collect();
            let (chosen, _) = all.partial_shuffle(&mut stream, size);
            let mut members = chosen.to_vec();
            members.sort_unstable();
            (members, 1.0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explain::testing::{AffineModel, ConstantModel};

    /// Class-0 score is x0 * x1; class 1 stays strictly below.
    struct ProductModel;

    impl Predictor for ProductModel {
        fn n_classes(&self) -> usize {
            2
        }
        fn n_features(&self) -> usize {
            2
        }
        fn predict_proba(&self, x: &Matrix) -> Matrix {
            let mut out = Matrix::zeros(x.n_rows(), 2);
            for r in 0..x.n_rows() {
                let s = x.get(r, 0) * x.get(r, 1);
                out.set(r, 0, s);
                out.set(r, 1, s - 1.0);
            }
            out
        }
    }

    #[test]
    fn single_feature_gets_the_whole_difference() {
        let model = AffineModel { weights: vec![3.0], intercept: 1.0 };
        let attribution = explain_kernel_shap(&model, &[2.0], &[0.5], 200, 1).unwrap();
        assert!((attribution.values[0] - 3.0 * 1.5).abs() < 1e-12);
    }

    #[test]
    fn affine_model_gets_exact_linear_shapley_values() {
        let weights = vec![2.0, -1.0, 0.5, 4.0];
        let model = AffineModel { weights: weights.clone(), intercept: 0.2 };
        let x = [1.0, 0.5, -2.0, 0.1];
        let baseline = [0.2, 0.0, -1.0, 0.3];
        let attribution = explain_kernel_shap(&model, &x, &baseline, 200, 1).unwrap();
        for i in 0..4 {
            let expected = weights[i] * (x[i] - baseline[i]);
            assert!(
                (attribution.values[i] - expected).abs() < 1e-9,
                "phi[{i}] = {}, expected {expected}",
                attribution.values[i]
            );
        }
    }

    #[test]
    fn product_model_splits_evenly() {
        // Brute force over the 4 coalitions of f = x0*x1 gives (0.5, 0.5).
        let attribution =
            explain_kernel_shap(&ProductModel, &[1.0, 1.0], &[0.0, 0.0], 200, 1).unwrap();
        assert!((attribution.values[0] - 0.5).abs() < 1e-9);
        assert!((attribution.values[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn efficiency_holds_in_both_modes() {
        let weights = vec![1.0, -0.5, 2.0, 0.3, -1.2];
        let model = AffineModel { weights, intercept: 0.1 };
        let x = [0.4, 1.0, -0.3, 0.9, 0.0];
        let baseline = [0.0, 0.2, 0.1, -0.4, 0.5];
        for mode in [ShapMode::Enumerate, ShapMode::Sample] {
            let attribution =
                explain_kernel_shap_mode(&model, &x, &baseline, 500, 3, mode).unwrap();
            let sum: f64 = attribution.values.iter().sum();
            let delta: f64 =
                (0..5).map(|i| model.weights[i] * (x[i] - baseline[i])).sum();
            assert!((sum - delta).abs() < 1e-9, "mode {mode:?}: sum {sum} vs {delta}");
        }
    }

    #[test]
    fn constant_model_gets_zero_values() {
        let model = ConstantModel { d: 3, value: 0.4 };
        let attribution =
            explain_kernel_shap(&model, &[1.0, 2.0, 3.0], &[0.0; 3], 100, 5).unwrap();
        assert!(attribution.values.iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn degenerate_sampled_system_falls_back_flagged() {
        // Two samples over 5 features cannot identify 4 free coefficients.
        let model = AffineModel { weights: vec![1.0; 5], intercept: 0.0 };
        let x = [1.0; 5];
        let baseline = [0.0; 5];
        let attribution =
            explain_kernel_shap_mode(&model, &x, &baseline, 2, 11, ShapMode::Sample).unwrap();
        assert_eq!(attribution.note.as_deref(), Some("efficiency-only-fallback"));
        let sum: f64 = attribution.values.iter().sum();
        assert!((sum - 5.0).abs() < 1e-9);
    }

    #[test]
    fn sampled_mode_is_deterministic_per_seed() {
        let model = ProductModel;
        let a = explain_kernel_shap_mode(&model, &[1.0, 2.0], &[0.0, 0.0], 64, 9, ShapMode::Sample)
            .unwrap();
        let b = explain_kernel_shap_mode(&model, &[1.0, 2.0], &[0.0, 0.0], 64, 9, ShapMode::Sample)
            .unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn zero_features_is_an_error() {
        struct ZeroModel;
        impl Predictor for ZeroModel {
            fn n_classes(&self) -> usize {
                2
            }
            fn n_features(&self) -> usize {
                0
            }
            fn predict_proba(&self, x: &Matrix) -> Matrix {
                Matrix::zeros(x.n_rows(), 2)
            }
        }
        assert!(matches!(
            explain_kernel_shap(&ZeroModel, &[], &[], 10, 0),
            Err(ExplainError::ZeroFeatures)
        ));
    }
}
