//! Local per-feature attributions for a single preprocessed sample: LIME,
//! Kernel SHAP, and feature ablation against any [`Predictor`].

mod ablation;
mod kernel_shap;
mod lime;
mod solve;

pub use ablation::{explain_feature_ablation, explain_feature_ablation_grouped};
pub use kernel_shap::{explain_kernel_shap, explain_kernel_shap_mode, ShapMode};
pub use lime::{explain_lime, perturbation_cloud};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::models::Predictor;
use crate::rng;
use crate::stats;

pub const DEFAULT_N_SAMPLES: usize = 200;
pub const DEFAULT_KERNEL_WIDTH: f64 = 0.1;
pub const DEFAULT_RIDGE_LAMBDA: f64 = 1.0;

#[derive(Debug, Error)]
pub enum ExplainError {
    #[error("sample contains non-finite values")]
    NonFiniteSample,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("need at least 2 perturbation samples, got {0}")]
    TooFewSamples(usize),
    #[error("model exposes zero features")]
    ZeroFeatures,
    #[error("singular normal equations; increase ridge_lambda or sample count")]
    SingularSystem,
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Technique {
    Lime,
    KernelShap,
    FeatureAblation,
}

impl Technique {
    pub const ALL: [Technique; 3] =
        [Technique::Lime, Technique::KernelShap, Technique::FeatureAblation];

    pub fn id(&self) -> &'static str {
        match self {
            Technique::Lime => "lime",
            Technique::KernelShap => "kernel_shap",
            Technique::FeatureAblation => "feature_ablation",
        }
    }
}

impl std::str::FromStr for Technique {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lime" => Ok(Technique::Lime),
            "kernel_shap" => Ok(Technique::KernelShap),
            "feature_ablation" => Ok(Technique::FeatureAblation),
            other => Err(format!("unknown technique {other:?}")),
        }
    }
}

/// Shared explainer settings. `baseline` is the reference row used to mask
/// features out (normally the training per-feature mean).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainConfig {
    pub n_samples: usize,
    pub kernel_width: f64,
    pub ridge_lambda: f64,
    pub seed: u64,
    pub baseline: Vec<f64>,
    /// When set, feature ablation masks these feature groups jointly (for
    /// one-hot blocks) instead of one encoded column at a time.
    pub ablation_groups: Option<Vec<Vec<usize>>>,
}

impl ExplainConfig {
    pub fn new(seed: u64, baseline: Vec<f64>) -> Self {
        Self {
            n_samples: DEFAULT_N_SAMPLES,
            kernel_width: DEFAULT_KERNEL_WIDTH,
            ridge_lambda: DEFAULT_RIDGE_LAMBDA,
            seed,
            baseline,
            ablation_groups: None,
        }
    }

    pub fn validate(&self) -> Result<(), ExplainError> {
        if self.n_samples < 1 {
            return Err(ExplainError::InvalidConfig("n_samples must be >= 1".into()));
        }
        if !self.kernel_width.is_finite() || self.kernel_width <= 0.0 {
            return Err(ExplainError::InvalidConfig("kernel_width must be positive".into()));
        }
        if !self.ridge_lambda.is_finite() || self.ridge_lambda < 0.0 {
            return Err(ExplainError::InvalidConfig("ridge_lambda must be >= 0".into()));
        }
        Ok(())
    }

    /// Stable fingerprint of every field that shapes the attribution.
    pub fn fingerprint(&self, technique: Technique) -> String {
        let text = format!(
            "{};n={};w={};l={};seed={};grouped={}",
            technique.id(),
            self.n_samples,
            self.kernel_width,
            self.ridge_lambda,
            self.seed,
            self.ablation_groups.is_some(),
        );
        format!("{:016x}", rng::hash_str(&text))
    }
}

/// Per-feature importance vector for one sample, one technique, one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub values: Vec<f64>,
    pub explained_class: usize,
    pub technique: Technique,
    /// Caller-assigned sample identifier; 0 until tagged.
    pub sample_id: u64,
    pub config_fingerprint: String,
    /// Set when a degenerate system forced a flagged fallback.
    pub note: Option<String>,
}

impl Attribution {
    pub fn with_sample_id(mut self, sample_id: u64) -> Self {
        self.sample_id = sample_id;
        self
    }
}

/// JSON-lines record for one attribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttributionRecord {
    pub dataset: String,
    pub model: String,
    pub technique: Technique,
    pub sample_id: u64,
    pub class: usize,
    pub values: Vec<f64>,
}

/// Per-feature arithmetic mean of the training rows.
///
/// Panics on an empty matrix; the baseline is only meaningful over real
/// training data.
pub fn mean_baseline(x_train: &Matrix) -> Vec<f64> {
    assert!(x_train.n_rows() > 0, "baseline needs a nonempty training matrix");
    let n = x_train.n_rows() as f64;
    let mut out = vec![0.0; x_train.n_cols()];
    for r in 0..x_train.n_rows() {
        for (acc, v) in out.iter_mut().zip(x_train.row(r)) {
            *acc += v / n;
        }
    }
    out
}

/// Dispatches to the configured technique.
pub fn explain_with(
    technique: Technique,
    model: &dyn Predictor,
    x: &[f64],
    config: &ExplainConfig,
) -> Result<Attribution, ExplainError> {
    match technique {
        Technique::Lime => explain_lime(model, x, config),
        Technique::KernelShap => {
            let mut attribution =
                explain_kernel_shap(model, x, &config.baseline, config.n_samples, config.seed)?;
            attribution.config_fingerprint = config.fingerprint(technique);
            Ok(attribution)
        }
        Technique::FeatureAblation => {
            let mut attribution = match &config.ablation_groups {
                Some(groups) => {
                    explain_feature_ablation_grouped(model, x, &config.baseline, groups)
                }
                None => explain_feature_ablation(model, x, &config.baseline),
            }?;
            attribution.config_fingerprint = config.fingerprint(technique);
            Ok(attribution)
        }
    }
}

pub(crate) fn check_sample(model: &dyn Predictor, x: &[f64]) -> Result<(), ExplainError> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(ExplainError::NonFiniteSample);
    }
    if x.len() != model.n_features() {
        return Err(ExplainError::DimensionMismatch { expected: model.n_features(), got: x.len() });
    }
    Ok(())
}

pub(crate) fn argmax_class(model: &dyn Predictor, x: &[f64]) -> usize {
    let probs = model.predict_proba(&Matrix::from_row(x));
    stats::argmax(probs.row(0))
}
