//! The five attribution-quality metrics: faithfulness estimate, selectivity,
//! average/max sensitivity, and complexity.
//!
//! Degenerate inputs (zero-variance correlations, all-zero attributions)
//! yield tagged missing values instead of silent zeros, so aggregates stay
//! uncontaminated.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::explain::{Attribution, ExplainError};
use crate::matrix::Matrix;
use crate::models::Predictor;
use crate::rng;
use crate::stats;

pub const DEFAULT_N_PERTURB: usize = 20;
pub const DEFAULT_LOWER_BOUND: f64 = 0.01;
pub const DEFAULT_UPPER_BOUND: f64 = 0.05;
pub const DEFAULT_ZERO_NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid metric config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricId {
    Faithfulness,
    Selectivity,
    AvgSensitivity,
    MaxSensitivity,
    Complexity,
}

impl MetricId {
    pub const ALL: [MetricId; 5] = [
        MetricId::Faithfulness,
        MetricId::Selectivity,
        MetricId::AvgSensitivity,
        MetricId::MaxSensitivity,
        MetricId::Complexity,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            MetricId::Faithfulness => "faithfulness",
            MetricId::Selectivity => "selectivity",
            MetricId::AvgSensitivity => "avg_sensitivity",
            MetricId::MaxSensitivity => "max_sensitivity",
            MetricId::Complexity => "complexity",
        }
    }
}

impl std::str::FromStr for MetricId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MetricId::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| format!("unknown metric {s:?}"))
    }
}

/// Why a metric value is missing; serialized into raw records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingReason {
    DegenerateCorrelation,
    DegenerateAttribution,
    AllPerturbationsFailed,
}

impl MissingReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            MissingReason::DegenerateCorrelation => "degenerate-correlation",
            MissingReason::DegenerateAttribution => "degenerate-attribution",
            MissingReason::AllPerturbationsFailed => "all-perturbations-failed",
        }
    }
}

/// A metric evaluation: a value, or a tagged reason it could not be computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricOutcome {
    Value(f64),
    Missing(MissingReason),
}

impl MetricOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            MetricOutcome::Value(v) => Some(*v),
            MetricOutcome::Missing(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub n_perturb: usize,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub seed: u64,
    pub zero_norm_tolerance: f64,
}

impl MetricConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            n_perturb: DEFAULT_N_PERTURB,
            lower_bound: DEFAULT_LOWER_BOUND,
            upper_bound: DEFAULT_UPPER_BOUND,
            seed,
            zero_norm_tolerance: DEFAULT_ZERO_NORM_TOLERANCE,
        }
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        if self.n_perturb < 1 {
            return Err(MetricsError::InvalidConfig("n_perturb must be >= 1".into()));
        }
        if !(0.0 < self.lower_bound && self.lower_bound <= self.upper_bound) {
            return Err(MetricsError::InvalidConfig(
                "bounds must satisfy 0 < lower <= upper".into(),
            ));
        }
        Ok(())
    }
}

/// Pearson correlation between the attribution and the per-feature prediction
/// drops under single-feature baseline replacement. Ranges over [-1, 1];
/// zero variance on either side is a tagged missing value.
pub fn faithfulness_estimate(
    model: &dyn Predictor,
    x: &[f64],
    attribution: &Attribution,
    baseline: &[f64],
) -> Result<MetricOutcome, MetricsError> {
    let d = check_dims(model, x, attribution, baseline)?;
    let class = attribution.explained_class;

    let mut rows = Vec::with_capacity(d + 1);
    rows.push(x.to_vec());
    for i in 0..d {
        let mut masked = x.to_vec();
        masked[i] = baseline[i];
        rows.push(masked);
    }
    let probs = model.predict_proba(&Matrix::from_rows(rows));
    let reference = probs.get(0, class);
    let drops: Vec<f64> = (0..d).map(|i| reference - probs.get(i + 1, class)).collect();

    Ok(match stats::pearson(&attribution.values, &drops) {
        Some(r) => MetricOutcome::Value(r),
        None => MetricOutcome::Missing(MissingReason::DegenerateCorrelation),
    })
}

/// Normalized area under the prediction-decay curve as features are replaced
/// by the baseline in descending attribution order (ties break toward the
/// lower feature index). Lower is better; probability-valued models stay in
/// [0, 1].
pub fn selectivity(
    model: &dyn Predictor,
    x: &[f64],
    attribution: &Attribution,
    baseline: &[f64],
) -> Result<f64, MetricsError> {
    let d = check_dims(model, x, attribution, baseline)?;
    let class = attribution.explained_class;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        attribution.values[b]
            .partial_cmp(&attribution.values[a])
            .expect("finite attribution values")
            .then(a.cmp(&b))
    });

    let mut rows = Vec::with_capacity(d + 1);
    let mut current = x.to_vec();
    rows.push(current.clone());
    for &i in &order {
        current[i] = baseline[i];
        rows.push(current.clone());
    }
    let probs = model.predict_proba(&Matrix::from_rows(rows));
    let sum: f64 = (0..=d).map(|k| probs.get(k, class)).sum();
    Ok(sum / (d + 1) as f64)
}

/// Outcome of one sensitivity evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SensitivityOutcome {
    Values {
        avg: f64,
        max: f64,
        /// Perturbations whose explainer call failed and were skipped.
        failed: usize,
    },
    Missing(MissingReason),
}

/// The signed uniform noise added to `x` for perturbation `j` (1-based).
///
/// Each coordinate draws a magnitude uniform in `[lower, upper)` and then an
/// independent sign, from a stream derived as `(seed, "perturb", j)`. This
/// procedure is a frozen contract: replaying it with the same config must
/// reproduce the draws bit for bit.
pub fn perturbation_noise(cfg: &MetricConfig, j: usize, d: usize) -> Vec<f64> {
    use rand::Rng;
    let mut stream = rng::stream(rng::derive(cfg.seed, &[rng::hash_str("perturb"), j as u64]));
    (0..d)
        .map(|_| {
            let magnitude =
                cfg.lower_bound + (cfg.upper_bound - cfg.lower_bound) * stream.random::<f64>();
            let sign = if stream.random::<bool>() { 1.0 } else { -1.0 };
            sign * magnitude
        })
        .collect()
}

/// Average and maximum relative change of the explanation under small input
/// perturbations.
///
/// The explainer closure receives the perturbation index (0 for the original
/// sample) so it can fix a derived seed per point, plus the point itself, and
/// returns the attribution values. Failed perturbations are skipped and
/// counted; if every draw fails the outcome is a tagged missing value.
pub fn sensitivity<F>(
    explainer: F,
    x: &[f64],
    cfg: &MetricConfig,
) -> Result<SensitivityOutcome, MetricsError>
where
    F: Fn(usize, &[f64]) -> Result<Vec<f64>, ExplainError>,
{
    cfg.validate()?;
    let baseline_explanation = explainer(0, x).map_err(|e| {
        MetricsError::InvalidConfig(format!("explainer failed on the original sample: {e}"))
    })?;
    let base_norm = stats::l2_norm(&baseline_explanation);
    let relative = base_norm >= cfg.zero_norm_tolerance;

    let mut distances = Vec::with_capacity(cfg.n_perturb);
    let mut failed = 0usize;
    for j in 1..=cfg.n_perturb {
        let noise = perturbation_noise(cfg, j, x.len());
        let perturbed: Vec<f64> = x.iter().zip(&noise).map(|(v, n)| v + n).collect();
        match explainer(j, &perturbed) {
            Ok(explanation) => {
                let diff: Vec<f64> = baseline_explanation
                    .iter()
                    .zip(&explanation)
                    .map(|(a, b)| a - b)
                    .collect();
                let mut dist = stats::l2_norm(&diff);
                if relative {
                    dist /= base_norm;
                }
                distances.push(dist);
            }
            Err(e) => {
                log::warn!("sensitivity draw {j} failed: {e}");
                failed += 1;
            }
        }
    }
    if distances.is_empty() {
        return Ok(SensitivityOutcome::Missing(MissingReason::AllPerturbationsFailed));
    }
    let avg = stats::mean(&distances);
    let max = distances.iter().copied().fold(0.0f64, f64::max);
    Ok(SensitivityOutcome::Values { avg, max, failed })
}

/// Shannon entropy of the normalized absolute attribution shares, in
/// [0, ln d]. An all-zero attribution is a tagged missing value.
pub fn complexity(attribution: &Attribution) -> MetricOutcome {
    let total: f64 = attribution.values.iter().map(|v| v.abs()).sum();
    if total == 0.0 || !total.is_finite() {
        return MetricOutcome::Missing(MissingReason::DegenerateAttribution);
    }
    let entropy = -attribution
        .values
        .iter()
        .map(|v| {
            let p = v.abs() / total;
            if p > 0.0 {
                p * p.ln()
            } else {
                0.0
            }
        })
        .sum::<f64>();
    MetricOutcome::Value(entropy)
}

fn check_dims(
    model: &dyn Predictor,
    x: &[f64],
    attribution: &Attribution,
    baseline: &[f64],
) -> Result<usize, MetricsError> {
    let d = model.n_features();
    for len in [x.len(), attribution.values.len(), baseline.len()] {
        if len != d {
            return Err(MetricsError::DimensionMismatch { expected: d, got: len });
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explain::testing::{AffineModel, ConstantModel};
    use crate::explain::{explain_feature_ablation, Technique};

    fn attribution_of(values: Vec<f64>, class: usize) -> Attribution {
        Attribution {
            values,
            explained_class: class,
            technique: Technique::FeatureAblation,
            sample_id: 0,
            config_fingerprint: String::new(),
            note: None,
        }
    }

    #[test]
    fn ablation_attribution_is_perfectly_faithful() {
        let model = AffineModel { weights: vec![1.0, -2.0, 0.4], intercept: 0.2 };
        let x = [0.5, 1.0, -0.7];
        let baseline = [0.0, 0.1, 0.3];
        let attribution = explain_feature_ablation(&model, &x, &baseline).unwrap();
        match faithfulness_estimate(&model, &x, &attribution, &baseline).unwrap() {
            MetricOutcome::Value(r) => assert!((r - 1.0).abs() < 1e-9),
            other => panic!("expected a value, got {other:?}"),
        }
    }

    #[test]
    fn anti_correlated_attribution_scores_minus_one() {
        let model = AffineModel { weights: vec![1.0, -2.0, 0.4], intercept: 0.2 };
        let x = [0.5, 1.0, -0.7];
        let baseline = [0.0, 0.1, 0.3];
        let fa = explain_feature_ablation(&model, &x, &baseline).unwrap();
        let flipped = attribution_of(fa.values.iter().map(|v| -v).collect(), fa.explained_class);
        match faithfulness_estimate(&model, &x, &flipped, &baseline).unwrap() {
            MetricOutcome::Value(r) => assert!((r + 1.0).abs() < 1e-9),
            other => panic!("expected a value, got {other:?}"),
        }
    }

    #[test]
    fn constant_model_faithfulness_is_missing() {
        let model = ConstantModel { d: 2, value: 0.5 };
        let attribution = attribution_of(vec![1.0, 2.0], 0);
        match faithfulness_estimate(&model, &[0.0, 0.0], &attribution, &[1.0, 1.0]).unwrap() {
            MetricOutcome::Missing(MissingReason::DegenerateCorrelation) => {}
            other => panic!("expected degenerate-correlation, got {other:?}"),
        }
    }

    #[test]
    fn constant_model_selectivity_equals_its_value() {
        let model = ConstantModel { d: 3, value: 0.7 };
        let attribution = attribution_of(vec![0.3, 0.2, 0.1], 0);
        let s = selectivity(&model, &[1.0, 2.0, 3.0], &attribution, &[0.0; 3]).unwrap();
        assert!((s - 0.7).abs() < 1e-12);
    }

    #[test]
    fn selectivity_matches_hand_curve() {
        // Masking feature 0 drops the score 0.9 -> 0.5; masking feature 1
        // leaves it at 0.5. Curve (0.9, 0.5, 0.5) averages to 1.9 / 3.
        struct StepModel;
        impl Predictor for StepModel {
            fn n_classes(&self) -> usize {
                2
            }
            fn n_features(&self) -> usize {
                2
            }
            fn predict_proba(&self, x: &Matrix) -> Matrix {
                let mut out = Matrix::zeros(x.n_rows(), 2);
                for r in 0..x.n_rows() {
                    let s = if x.get(r, 0) > 0.5 { 0.9 } else { 0.5 };
                    out.set(r, 0, s);
                    out.set(r, 1, s - 1.0);
                }
                out
            }
        }
        let attribution = attribution_of(vec![1.0, 0.5], 0);
        let s = selectivity(&StepModel, &[1.0, 1.0], &attribution, &[0.0, 0.0]).unwrap();
        assert!((s - 1.9 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn selectivity_breaks_ties_toward_lower_index() {
        struct FirstFeatureModel;
        impl Predictor for FirstFeatureModel {
            fn n_classes(&self) -> usize {
                2
            }
            fn n_features(&self) -> usize {
                2
            }
            fn predict_proba(&self, x: &Matrix) -> Matrix {
                let mut out = Matrix::zeros(x.n_rows(), 2);
                for r in 0..x.n_rows() {
                    out.set(r, 0, x.get(r, 0));
                    out.set(r, 1, x.get(r, 0) - 1.0);
                }
                out
            }
        }
        let attribution = attribution_of(vec![0.5, 0.5], 0);
        // Index 0 is masked first: curve (1, 0, 0), mean 1/3.
        let s = selectivity(&FirstFeatureModel, &[1.0, 1.0], &attribution, &[0.0, 0.0]).unwrap();
        assert!((s - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn default_perturbation_protocol() {
        let cfg = MetricConfig::new(0);
        assert_eq!(cfg.n_perturb, 20);
        assert_eq!((cfg.lower_bound, cfg.upper_bound), (0.01, 0.05));
        assert_eq!(cfg.zero_norm_tolerance, 1e-12);
        // Magnitudes respect the bounds and both signs occur.
        let noise = perturbation_noise(&cfg, 1, 200);
        assert!(noise.iter().all(|v| (0.01..0.05).contains(&v.abs())));
        assert!(noise.iter().any(|v| *v > 0.0) && noise.iter().any(|v| *v < 0.0));
    }

    #[test]
    fn constant_explainer_has_zero_sensitivity() {
        let cfg = MetricConfig::new(3);
        let outcome =
            sensitivity(|_, _| Ok(vec![1.0, 2.0, 3.0]), &[0.1, 0.2, 0.3], &cfg).unwrap();
        match outcome {
            SensitivityOutcome::Values { avg, max, failed } => {
                assert_eq!((avg, max, failed), (0.0, 0.0, 0));
            }
            other => panic!("expected values, got {other:?}"),
        }
    }

    #[test]
    fn identity_explainer_matches_monte_carlo_replay() {
        // e(z) = z, so each distance is ||eta_j|| / ||x||; the oracle replays
        // the frozen draw procedure.
        let cfg = MetricConfig::new(17);
        let x = [0.4, -0.8, 1.2, 0.05];
        let outcome = sensitivity(|_, z| Ok(z.to_vec()), &x, &cfg).unwrap();
        let mut expected = Vec::new();
        for j in 1..=cfg.n_perturb {
            let noise = perturbation_noise(&cfg, j, x.len());
            expected.push(stats::l2_norm(&noise) / stats::l2_norm(&x));
        }
        match outcome {
            SensitivityOutcome::Values { avg, max, failed } => {
                assert_eq!(failed, 0);
                let exp_avg = stats::mean(&expected);
                let exp_max = expected.iter().copied().fold(0.0f64, f64::max);
                assert!((avg - exp_avg).abs() < 1e-12);
                assert!((max - exp_max).abs() < 1e-12);
            }
            other => panic!("expected values, got {other:?}"),
        }
    }

    #[test]
    fn sensitivity_replay_is_bit_identical() {
        let cfg = MetricConfig::new(5);
        let x = [0.3, 0.6];
        let f = |_: usize, z: &[f64]| Ok(vec![z[0] * z[1], z[0] - z[1]]);
        let a = sensitivity(f, &x, &cfg).unwrap();
        let b = sensitivity(f, &x, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn failed_draws_are_skipped_and_counted() {
        let cfg = MetricConfig::new(1);
        let x = [1.0];
        let flaky = |j: usize, z: &[f64]| {
            if j % 2 == 1 {
                Err(ExplainError::SingularSystem)
            } else {
                Ok(z.to_vec())
            }
        };
        match sensitivity(flaky, &x, &cfg).unwrap() {
            SensitivityOutcome::Values { failed, .. } => assert_eq!(failed, 10),
            other => panic!("expected values, got {other:?}"),
        }
        let always_fail = |j: usize, z: &[f64]| {
            if j == 0 {
                Ok(z.to_vec())
            } else {
                Err(ExplainError::SingularSystem)
            }
        };
        match sensitivity(always_fail, &x, &cfg).unwrap() {
            SensitivityOutcome::Missing(MissingReason::AllPerturbationsFailed) => {}
            other => panic!("expected missing, got {other:?}"),
        }
    }

    #[test]
    fn complexity_hand_values() {
        let uniform = attribution_of(vec![0.25; 4], 0);
        match complexity(&uniform) {
            MetricOutcome::Value(v) => assert!((v - 4.0f64.ln()).abs() < 1e-12),
            other => panic!("expected value, got {other:?}"),
        }
        let point_mass = attribution_of(vec![0.0, 3.0, 0.0], 0);
        assert_eq!(complexity(&point_mass), MetricOutcome::Value(0.0));
        let mixed = attribution_of(vec![0.5, 0.25, 0.25], 0);
        match complexity(&mixed) {
            MetricOutcome::Value(v) => assert!((v - 1.0397207708399179).abs() < 1e-9),
            other => panic!("expected value, got {other:?}"),
        }
    }

    #[test]
    fn all_zero_attribution_is_missing() {
        let zero = attribution_of(vec![0.0; 3], 0);
        assert_eq!(
            complexity(&zero),
            MetricOutcome::Missing(MissingReason::DegenerateAttribution)
        );
    }

    #[test]
    fn complexity_ignores_sign_and_scale() {
        let a = attribution_of(vec![0.2, -0.5, 0.3], 0);
        let b = attribution_of(vec![-0.4, 1.0, -0.6], 0);
        let (MetricOutcome::Value(va), MetricOutcome::Value(vb)) = (complexity(&a), complexity(&b))
        else {
            panic!("expected values");
        };
        assert!((va - vb).abs() < 1e-12);
    }

    #[test]
    fn faithfulness_is_scale_invariant() {
        let model = AffineModel { weights: vec![0.7, -0.3, 1.1], intercept: 0.0 };
        let x = [1.0, 0.2, -0.4];
        let baseline = [0.0; 3];
        let fa = explain_feature_ablation(&model, &x, &baseline).unwrap();
        let base = faithfulness_estimate(&model, &x, &fa, &baseline).unwrap();
        for scale in [0.001, 0.5, 42.0] {
            let scaled =
                attribution_of(fa.values.iter().map(|v| v * scale).collect(), fa.explained_class);
            let r = faithfulness_estimate(&model, &x, &scaled, &baseline).unwrap();
            match (base, r) {
                (MetricOutcome::Value(a), MetricOutcome::Value(b)) => {
                    assert!((a - b).abs() < 1e-9)
                }
                other => panic!("expected values, got {other:?}"),
            }
        }
    }
}
