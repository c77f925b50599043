//! Run configuration: dataset roster, seeds, sampling knobs, and bin edges.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::explain::{DEFAULT_KERNEL_WIDTH, DEFAULT_N_SAMPLES, DEFAULT_RIDGE_LAMBDA};
use crate::metrics::{DEFAULT_LOWER_BOUND, DEFAULT_N_PERTURB, DEFAULT_UPPER_BOUND};
use crate::models::DEFAULT_TRIALS;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub id: String,
    pub path: PathBuf,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExplainSettings {
    pub n_samples: usize,
    pub kernel_width: f64,
    pub ridge_lambda: f64,
    /// Mask one-hot groups jointly during ablation instead of per column.
    pub group_ablation: bool,
}

impl Default for ExplainSettings {
    fn default() -> Self {
        Self {
            n_samples: DEFAULT_N_SAMPLES,
            kernel_width: DEFAULT_KERNEL_WIDTH,
            ridge_lambda: DEFAULT_RIDGE_LAMBDA,
            group_ablation: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricSettings {
    pub n_perturb: usize,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

impl Default for MetricSettings {
    fn default() -> Self {
        Self {
            n_perturb: DEFAULT_N_PERTURB,
            lower_bound: DEFAULT_LOWER_BOUND,
            upper_bound: DEFAULT_UPPER_BOUND,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub datasets: Vec<DatasetSpec>,
    pub seed: u64,
    /// Samples drawn per class within each consensus group.
    #[serde(default = "default_per_class")]
    pub per_class_samples: usize,
    #[serde(default = "default_split_ratio")]
    pub split_ratio: f64,
    #[serde(default = "default_trials")]
    pub tuning_trials: usize,
    #[serde(default)]
    pub explain: ExplainSettings,
    #[serde(default)]
    pub metrics: MetricSettings,
    /// Lower perturbation-sample count for the explainer calls inside
    /// sensitivity; it dominates runtime at the defaults.
    #[serde(default)]
    pub sensitivity_inner_samples: Option<usize>,
    /// Strictly increasing F1 bin edges in [0, 1].
    #[serde(default = "default_bin_edges")]
    pub bin_edges: Vec<f64>,
    #[serde(default = "default_missing_markers")]
    pub missing_markers: Vec<String>,
}

fn default_per_class() -> usize {
    5
}

fn default_split_ratio() -> f64 {
    0.8
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

pub(crate) fn default_bin_edges() -> Vec<f64> {
    (0..=10).map(|i| 0.50 + 0.05 * i as f64).collect()
}

fn default_missing_markers() -> Vec<String> {
    crate::data::DEFAULT_MISSING_MARKERS.iter().map(|m| m.to_string()).collect()
}

impl RunConfig {
    pub fn new(datasets: Vec<DatasetSpec>, seed: u64) -> Self {
        Self {
            datasets,
            seed,
            per_class_samples: default_per_class(),
            split_ratio: default_split_ratio(),
            tuning_trials: default_trials(),
            explain: ExplainSettings::default(),
            metrics: MetricSettings::default(),
            sensitivity_inner_samples: None,
            bin_edges: default_bin_edges(),
            missing_markers: default_missing_markers(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let config: RunConfig = serde_json::from_str(text)
            .map_err(|e| BenchError::InvalidConfig(format!("{e} (line {})", e.line())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.datasets.is_empty() {
            return Err(BenchError::InvalidConfig("at least one dataset is required".into()));
        }
        let mut ids: Vec<&str> = self.datasets.iter().map(|d| d.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.datasets.len() {
            return Err(BenchError::InvalidConfig("dataset ids must be unique".into()));
        }
        for spec in &self.datasets {
            if spec.target.is_empty() {
                return Err(BenchError::InvalidConfig(format!(
                    "dataset {:?} has an empty target_name",
                    spec.id
                )));
            }
        }
        if self.per_class_samples < 1 {
            return Err(BenchError::InvalidConfig("per_class_samples must be >= 1".into()));
        }
        if !(0.0 < self.split_ratio && self.split_ratio < 1.0) {
            return Err(BenchError::InvalidConfig("split_ratio must be in (0, 1)".into()));
        }
        if self.tuning_trials < 1 {
            return Err(BenchError::InvalidConfig("tuning_trials must be >= 1".into()));
        }
        if self.bin_edges.len() < 2 {
            return Err(BenchError::InvalidConfig("bin_edges needs at least 2 edges".into()));
        }
        if !self.bin_edges.windows(2).all(|w| w[0] < w[1]) {
            return Err(BenchError::InvalidConfig("bin_edges must be strictly increasing".into()));
        }
        if self.bin_edges.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(BenchError::InvalidConfig("bin_edges must lie in [0, 1]".into()));
        }
        if self.explain.n_samples < 2 {
            return Err(BenchError::InvalidConfig("explain.n_samples must be >= 2".into()));
        }
        if !self.explain.kernel_width.is_finite() || self.explain.kernel_width <= 0.0 {
            return Err(BenchError::InvalidConfig("explain.kernel_width must be positive".into()));
        }
        if !self.explain.ridge_lambda.is_finite() || self.explain.ridge_lambda < 0.0 {
            return Err(BenchError::InvalidConfig("explain.ridge_lambda must be >= 0".into()));
        }
        if self.metrics.n_perturb < 1 {
            return Err(BenchError::InvalidConfig("metrics.n_perturb must be >= 1".into()));
        }
        if !(0.0 < self.metrics.lower_bound && self.metrics.lower_bound <= self.metrics.upper_bound)
        {
            return Err(BenchError::InvalidConfig(
                "metrics bounds must satisfy 0 < lower <= upper".into(),
            ));
        }
        if self.sensitivity_inner_samples.is_some_and(|n| n < 2) {
            return Err(BenchError::InvalidConfig(
                "sensitivity_inner_samples must be >= 2 when set".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_json() -> String {
        r#"{
            "datasets": [{"id": "a", "path": "/tmp/a.csv", "target": "y"}],
            "seed": 7
        }"#
        .to_string()
    }

    #[test]
    fn defaults_fill_in() {
        let config = RunConfig::from_json(&minimal_json()).unwrap();
        assert_eq!(config.per_class_samples, 5);
        assert_eq!(config.tuning_trials, 30);
        assert_eq!(config.explain.n_samples, 200);
        assert_eq!(config.metrics.n_perturb, 20);
        assert_eq!(config.bin_edges.len(), 11);
        assert_eq!(config.bin_edges[0], 0.50);
        assert_eq!(*config.bin_edges.last().unwrap(), 1.00);
    }

    #[test]
    fn bad_json_reports_line() {
        let err = RunConfig::from_json("{\n\"datasets\": oops\n}").unwrap_err();
        assert!(err.to_string().contains("line"));
    }

    #[test]
    fn validation_rejects_bad_edges() {
        let mut config = RunConfig::from_json(&minimal_json()).unwrap();
        config.bin_edges = vec![0.5, 0.5];
        assert!(config.validate().is_err());
        config.bin_edges = vec![0.9];
        assert!(config.validate().is_err());
    }

    #[test]
    fn validation_rejects_empty_target() {
        let mut config = RunConfig::from_json(&minimal_json()).unwrap();
        config.datasets[0].target = String::new();
        assert!(config.validate().is_err());
    }

    #[test]
    fn json_round_trip_is_stable() {
        let config = RunConfig::from_json(&minimal_json()).unwrap();
        let text = serde_json::to_string(&config).unwrap();
        let again = RunConfig::from_json(&text).unwrap();
        assert_eq!(config, again);
    }
}
