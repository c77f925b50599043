//! End-to-end benchmark: split, preprocess, tune and train the three model
//! families, form consensus groups, sample fixed instances, score every
//! attribution with the five metrics, bin by F1, aggregate, and correlate
//! with dataset feature counts.

pub mod aggregate;
pub mod config;
pub mod correlate;
pub mod groups;
pub mod manifest;
pub mod records;
pub mod report;

pub use aggregate::{aggregate, assign_bin, AggregateRow, BinKey};
pub use config::{DatasetSpec, ExplainSettings, MetricSettings, RunConfig};
pub use correlate::{feature_count_correlation, CorrelationPoint, CorrelationSummary};
pub use groups::{consensus_groups, sample_per_class, ConsensusGroup, ConsensusGroups};
pub use manifest::{DatasetFailure, DatasetSummary, Manifest, ModelSummary};
pub use records::{read_records_jsonl, write_records_jsonl, MetricRecord};

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::data::{
    self, fit_preprocessor, infer_schema, stratified_split, transform, DataError, FeatureMatrix,
};
use crate::explain::{explain_with, mean_baseline, ExplainConfig, ExplainError, Technique};
use crate::metrics::{
    complexity, faithfulness_estimate, selectivity, sensitivity, MetricConfig, MetricId,
    MetricOutcome, MetricsError, SensitivityOutcome,
};
use crate::models::{
    eval_scores, train_with_params, tune, EvalScores, ModelError, ModelFamily, Predictor,
    TrainedModel,
};
use crate::{exec, rng};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Explain(#[from] ExplainError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("correlation needs at least 3 datasets, got {0}")]
    TooFewDatasets(usize),
    #[error("malformed record at line {line}: {message}")]
    MalformedRecord { line: usize, message: String },
}

/// Everything one run produces; the file writers serialize it verbatim.
#[derive(Debug)]
pub struct BenchmarkReport {
    pub records: Vec<MetricRecord>,
    pub aggregate: BTreeMap<BinKey, AggregateRow>,
    pub correlation: Option<CorrelationSummary>,
    pub manifest: Manifest,
}

impl BenchmarkReport {
    pub fn has_failures(&self) -> bool {
        !self.manifest.failures.is_empty()
    }
}

struct DatasetResult {
    summary: DatasetSummary,
    records: Vec<MetricRecord>,
}

/// Runs the full benchmark. Per-dataset failures are isolated into the
/// manifest and the run continues; only configuration problems abort.
pub fn run_benchmark(config: &RunConfig) -> Result<BenchmarkReport, BenchError> {
    config.validate()?;

    let outcomes: Vec<Result<DatasetResult, DatasetFailure>> =
        exec::map_slice(&config.datasets, |spec| {
            process_dataset(spec, config).map_err(|e| {
                log::error!("dataset {:?} failed: {e}", spec.id);
                DatasetFailure { id: spec.id.clone(), error: e.to_string() }
            })
        });

    let mut summaries = Vec::new();
    let mut failures = Vec::new();
    let mut records = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(result) => {
                summaries.push(result.summary);
                records.extend(result.records);
            }
            Err(failure) => failures.push(failure),
        }
    }
    records.sort_by_key(MetricRecord::sort_key);

    let aggregate_table = aggregate(&records);
    let feature_counts: BTreeMap<String, usize> =
        summaries.iter().map(|s| (s.id.clone(), s.feature_count)).collect();
    let (correlation, correlation_note) = if feature_counts.len() >= 3 {
        (Some(feature_count_correlation(&records, &feature_counts)?), None)
    } else {
        (
            None,
            Some(format!(
                "correlation skipped: {} successful dataset(s), need 3",
                feature_counts.len()
            )),
        )
    };

    let manifest = Manifest {
        format_version: manifest::MANIFEST_FORMAT_VERSION,
        master_seed: config.seed,
        config_hash_sha256: manifest::config_hash(config),
        config: config.clone(),
        datasets: summaries,
        failures,
        bin_counts: manifest::bin_counts(&records),
        decisions: manifest::decision_flags(config),
        correlation_note,
    };

    Ok(BenchmarkReport { records, aggregate: aggregate_table, correlation, manifest })
}

/// Writes the four run outputs into `out_dir`.
pub fn write_report_files(report: &BenchmarkReport, out_dir: impl AsRef<Path>) -> Result<(), BenchError> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir)?;
    let mut records_bytes = Vec::new();
    write_records_jsonl(&mut records_bytes, &report.records)?;
    std::fs::write(out_dir.join(report::RECORDS_FILE), records_bytes)?;
    std::fs::write(
        out_dir.join(report::AGGREGATE_FILE),
        report::aggregate_csv_bytes(&report.aggregate)?,
    )?;
    std::fs::write(
        out_dir.join(report::CORRELATION_FILE),
        report::correlation_csv_bytes(report.correlation.as_ref())?,
    )?;
    std::fs::write(out_dir.join(report::MANIFEST_FILE), report::manifest_bytes(&report.manifest)?)?;
    Ok(())
}

fn process_dataset(spec: &DatasetSpec, config: &RunConfig) -> Result<DatasetResult, BenchError> {
    let master = config.seed;
    let ds = rng::hash_str(&spec.id);
    let checksum = manifest::file_checksum(&spec.path)?;

    let markers: Vec<&str> = config.missing_markers.iter().map(String::as_str).collect();
    let table = data::load_csv_with_markers(&spec.path, &spec.target, &markers)?;
    let schema = infer_schema(&table)?;
    let labels = data::target_labels(&table, &schema);

    let split = stratified_split(
        &labels,
        config.split_ratio,
        rng::derive(master, &[ds, rng::hash_str("split")]),
    )?;
    let state = fit_preprocessor(&table, &schema, &split.train)?;
    let fm_train = transform(&state, &table, &split.train)?;
    let fm_test = transform(&state, &table, &split.test)?;
    let y_train: Vec<usize> = split.train.iter().map(|&i| labels[i]).collect();
    let y_test: Vec<usize> = split.test.iter().map(|&i| labels[i]).collect();

    let baseline = mean_baseline(&fm_train.matrix);
    let ablation_groups = config.explain.group_ablation.then(|| fm_train.source_groups());

    // Tune and train the three families on the full training partition.
    let mut trained: Vec<(ModelFamily, TrainedModel, EvalScores, Option<String>)> = Vec::new();
    let mut predictions: Vec<Vec<usize>> = Vec::new();
    let mut model_summaries = BTreeMap::new();
    for (family_idx, family) in ModelFamily::ALL.into_iter().enumerate() {
        let tune_seed = rng::derive(master, &[ds, rng::hash_str("tune"), family_idx as u64]);
        let outcome = tune(family, &fm_train.matrix, &y_train, config.tuning_trials, tune_seed)?;
        let train_seed = rng::derive(master, &[ds, rng::hash_str("train"), family_idx as u64]);
        let model = train_with_params(&outcome.best, &fm_train.matrix, &y_train, train_seed)?;
        let preds = model.predict_classes(&fm_test.matrix);
        let scores = eval_scores(&y_test, &preds)?;
        let bin = assign_bin(scores.f1, &config.bin_edges);
        model_summaries.insert(
            family.id().to_string(),
            ModelSummary {
                scores,
                f1_bin: bin.clone(),
                params: outcome.best.clone(),
                tuning_best_trial: outcome.best_trial,
            },
        );
        predictions.push(preds);
        trained.push((family, model, scores, bin));
    }

    let consensus = consensus_groups(&predictions, &y_test)?;
    let mut sampled: BTreeMap<ConsensusGroup, Vec<usize>> = BTreeMap::new();
    for (group_idx, group) in ConsensusGroup::ALL.into_iter().enumerate() {
        let selection = sample_per_class(
            consensus.of(group),
            &y_test,
            config.per_class_samples,
            rng::derive(master, &[ds, rng::hash_str("sample"), group_idx as u64]),
        );
        sampled.insert(group, selection);
    }

    // One task per (model, group, sample); techniques and metrics run inside.
    struct Task {
        family_idx: usize,
        group: ConsensusGroup,
        position: usize,
    }
    let mut tasks = Vec::new();
    for family_idx in 0..trained.len() {
        for group in ConsensusGroup::ALL {
            for &position in &sampled[&group] {
                tasks.push(Task { family_idx, group, position });
            }
        }
    }

    let nested: Vec<Vec<MetricRecord>> = exec::map_slice(&tasks, |task| {
        let (family, model, _, bin) = &trained[task.family_idx];
        evaluate_sample(SampleContext {
            spec,
            config,
            master,
            ds,
            family: *family,
            model,
            bin: bin.clone(),
            group: task.group,
            fm_test: &fm_test,
            raw_row: split.test[task.position] as u64,
            position: task.position,
            baseline: &baseline,
            ablation_groups: ablation_groups.as_deref(),
        })
    });
    let mut records: Vec<MetricRecord> = nested.into_iter().flatten().collect();
    records.sort_by_key(MetricRecord::sort_key);

    let summary = DatasetSummary {
        id: spec.id.clone(),
        path: spec.path.display().to_string(),
        checksum_sha256: checksum,
        n_rows: table.n_rows(),
        n_classes: schema.n_classes(),
        feature_count: fm_train.n_features(),
        train_rows: split.train.len(),
        test_rows: split.test.len(),
        models: model_summaries,
        consensus_correct: consensus.correct.len(),
        consensus_wrong: consensus.wrong.len(),
        sampled_correct: sampled[&ConsensusGroup::Correct].len(),
        sampled_wrong: sampled[&ConsensusGroup::Wrong].len(),
    };
    Ok(DatasetResult { summary, records })
}

struct SampleContext<'a> {
    spec: &'a DatasetSpec,
    config: &'a RunConfig,
    master: u64,
    ds: u64,
    family: ModelFamily,
    model: &'a TrainedModel,
    bin: Option<String>,
    group: ConsensusGroup,
    fm_test: &'a FeatureMatrix,
    raw_row: u64,
    position: usize,
    baseline: &'a [f64],
    ablation_groups: Option<&'a [Vec<usize>]>,
}

/// All five metrics for all three techniques on one sample, as 15 records.
fn evaluate_sample(ctx: SampleContext<'_>) -> Vec<MetricRecord> {
    let x = ctx.fm_test.matrix.row(ctx.position);
    let mut out = Vec::with_capacity(Technique::ALL.len() * MetricId::ALL.len());

    for (technique_idx, technique) in Technique::ALL.into_iter().enumerate() {
        let explain_seed = rng::derive(
            ctx.master,
            &[ctx.ds, rng::hash_str("explain"), ctx.raw_row, technique_idx as u64],
        );
        let metric_seed = rng::derive(
            ctx.master,
            &[ctx.ds, rng::hash_str("metrics"), ctx.raw_row, technique_idx as u64],
        );
        let mut explain_config = ExplainConfig::new(
            rng::derive(explain_seed, &[0]),
            ctx.baseline.to_vec(),
        );
        explain_config.n_samples = ctx.config.explain.n_samples;
        explain_config.kernel_width = ctx.config.explain.kernel_width;
        explain_config.ridge_lambda = ctx.config.explain.ridge_lambda;
        explain_config.ablation_groups = ctx.ablation_groups.map(<[Vec<usize>]>::to_vec);

        let record = |metric: MetricId, value: Option<f64>, reason: Option<String>| MetricRecord {
            dataset: ctx.spec.id.clone(),
            model: ctx.family.id().to_string(),
            f1_bin: ctx.bin.clone(),
            group: ctx.group,
            technique,
            metric,
            sample_id: ctx.raw_row,
            value,
            reason,
        };

        let attribution = match explain_with(technique, ctx.model, x, &explain_config) {
            Ok(a) => a.with_sample_id(ctx.raw_row),
            Err(e) => {
                log::warn!(
                    "explainer {technique:?} failed on sample {} of {:?}: {e}",
                    ctx.raw_row,
                    ctx.spec.id
                );
                let reason = format!("explainer-error: {e}");
                out.extend(
                    MetricId::ALL.map(|m| record(m, None, Some(reason.clone()))),
                );
                continue;
            }
        };

        out.push(match faithfulness_estimate(ctx.model, x, &attribution, ctx.baseline) {
            Ok(MetricOutcome::Value(v)) => record(MetricId::Faithfulness, Some(v), None),
            Ok(MetricOutcome::Missing(reason)) => {
                record(MetricId::Faithfulness, None, Some(reason.as_str().to_string()))
            }
            Err(e) => record(MetricId::Faithfulness, None, Some(format!("metric-error: {e}"))),
        });

        out.push(match selectivity(ctx.model, x, &attribution, ctx.baseline) {
            Ok(v) => record(MetricId::Selectivity, Some(v), None),
            Err(e) => record(MetricId::Selectivity, None, Some(format!("metric-error: {e}"))),
        });

        let inner_samples =
            ctx.config.sensitivity_inner_samples.unwrap_or(ctx.config.explain.n_samples);
        let inner = |j: usize, z: &[f64]| {
            let mut inner_config = explain_config.clone();
            inner_config.n_samples = inner_samples;
            inner_config.seed = rng::derive(explain_seed, &[j as u64]);
            explain_with(technique, ctx.model, z, &inner_config).map(|a| a.values)
        };
        let mut metric_config = MetricConfig::new(metric_seed);
        metric_config.n_perturb = ctx.config.metrics.n_perturb;
        metric_config.lower_bound = ctx.config.metrics.lower_bound;
        metric_config.upper_bound = ctx.config.metrics.upper_bound;
        match sensitivity(inner, x, &metric_config) {
            Ok(SensitivityOutcome::Values { avg, max, .. }) => {
                out.push(record(MetricId::AvgSensitivity, Some(avg), None));
                out.push(record(MetricId::MaxSensitivity, Some(max), None));
            }
            Ok(SensitivityOutcome::Missing(reason)) => {
                let tag = reason.as_str().to_string();
                out.push(record(MetricId::AvgSensitivity, None, Some(tag.clone())));
                out.push(record(MetricId::MaxSensitivity, None, Some(tag)));
            }
            Err(e) => {
                let tag = format!("metric-error: {e}");
                out.push(record(MetricId::AvgSensitivity, None, Some(tag.clone())));
                out.push(record(MetricId::MaxSensitivity, None, Some(tag)));
            }
        }

        out.push(match complexity(&attribution) {
            MetricOutcome::Value(v) => record(MetricId::Complexity, Some(v), None),
            MetricOutcome::Missing(reason) => {
                record(MetricId::Complexity, None, Some(reason.as_str().to_string()))
            }
        });
    }
    out
}
