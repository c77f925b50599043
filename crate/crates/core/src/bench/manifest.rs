//! The run manifest: seeds, config hash, per-dataset summaries, bin counts,
//! and the convention flags other tools need to interpret the numbers.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::RunConfig;
use super::records::MetricRecord;
use crate::models::{EvalScores, ModelParams};

pub const MANIFEST_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub scores: EvalScores,
    pub f1_bin: Option<String>,
    pub params: ModelParams,
    pub tuning_best_trial: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub id: String,
    pub path: String,
    pub checksum_sha256: String,
    pub n_rows: usize,
    pub n_classes: usize,
    pub feature_count: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub models: BTreeMap<String, ModelSummary>,
    pub consensus_correct: usize,
    pub consensus_wrong: usize,
    pub sampled_correct: usize,
    pub sampled_wrong: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFailure {
    pub id: String,
    pub error: String,
}

/// A per-bin "count" has three defensible readings, so all three are
/// reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BinCounts {
    pub records: usize,
    pub samples: usize,
    pub model_dataset_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub master_seed: u64,
    pub config_hash_sha256: String,
    pub config: RunConfig,
    pub datasets: Vec<DatasetSummary>,
    pub failures: Vec<DatasetFailure>,
    pub bin_counts: BTreeMap<String, BinCounts>,
    /// Conventions this build commits to where the underlying methods leave
    /// room for interpretation.
    pub decisions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation_note: Option<String>,
}

pub fn config_hash(config: &RunConfig) -> String {
    let canonical = serde_json::to_vec(config).expect("config serializes");
    hex_digest(&canonical)
}

pub fn file_checksum(path: impl AsRef<Path>) -> std::io::Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(hex_digest(&bytes))
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn decision_flags(config: &RunConfig) -> Vec<String> {
    let ablation = if config.explain.group_ablation {
        "ablation=one-hot-groups-jointly"
    } else {
        "ablation=per-encoded-column"
    };
    vec![
        "normalization=z-score(population-std,floor=1e-12)".to_string(),
        "imputation=train-median(numeric),train-mode(categorical)".to_string(),
        "unseen-category=all-zero-one-hot-group".to_string(),
        "f1-averaging=macro(zero-division=0)".to_string(),
        "tuning=seeded-random-search,single-stratified-80/20-validation".to_string(),
        "explained-class=model-argmax-at-x".to_string(),
        format!(
            "lime-kernel=exp(-dist2/(2*w^2)),w={},unit-gaussian-perturbations",
            config.explain.kernel_width
        ),
        "kernel-shap=enumerate-when-2^d<=4096-else-kernel-mass-sampling".to_string(),
        ablation.to_string(),
        "faithfulness=pearson-over-single-feature-baseline-replacement".to_string(),
        "selectivity=mean-of-decay-curve-including-k0,signed-descending-rank".to_string(),
        format!(
            "sensitivity=relative-l2,signed-uniform-noise-in[{},{}],abs-fallback-below-1e-12",
            config.metrics.lower_bound, config.metrics.upper_bound
        ),
        "faithfulness-inversion=once-at-aggregation(raw-records-keep-sign)".to_string(),
        "correlation=reported-values-over-all-present-records".to_string(),
        format!(
            "seed-derivation=splitmix64-chain(master,dataset,stage,sample,technique);master={}",
            config.seed
        ),
    ]
}

/// Tallies the three candidate readings of a per-bin count.
pub fn bin_counts(records: &[MetricRecord]) -> BTreeMap<String, BinCounts> {
    let mut per_bin: BTreeMap<String, BinCounts> = BTreeMap::new();
    let mut seen_samples: BTreeMap<String, Vec<(String, u64)>> = BTreeMap::new();
    let mut seen_pairs: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
    for record in records {
        let Some(bin) = &record.f1_bin else { continue };
        let counts = per_bin.entry(bin.clone()).or_default();
        counts.records += 1;
        let samples = seen_samples.entry(bin.clone()).or_default();
        let sample_key = (record.dataset.clone(), record.sample_id);
        if !samples.contains(&sample_key) {
            samples.push(sample_key);
            counts.samples += 1;
        }
        let pairs = seen_pairs.entry(bin.clone()).or_default();
        let pair_key = (record.dataset.clone(), record.model.clone());
        if !pairs.contains(&pair_key) {
            pairs.push(pair_key);
            counts.model_dataset_pairs += 1;
        }
    }
    per_bin
}
