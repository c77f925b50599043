//! `xaieval`: run attribution-quality benchmarks, explain single samples,
//! recompute aggregates, and emit plot-ready correlation data.
//!
//! Exit codes: 0 success, 1 runtime/data failure (partial outputs retained),
//! 2 configuration or validation error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use xaieval_core::bench::{
    aggregate, feature_count_correlation, read_records_jsonl, report, run_benchmark,
    write_report_files, RunConfig,
};
use xaieval_core::data::{
    fit_preprocessor, infer_schema, load_csv_with_markers, stratified_split, target_labels,
    transform,
};
use xaieval_core::explain::{explain_with, mean_baseline, ExplainConfig, Technique};
use xaieval_core::metrics::{
    complexity, faithfulness_estimate, selectivity, sensitivity, MetricConfig, MetricOutcome,
    SensitivityOutcome,
};
use xaieval_core::models::{
    preprocessing_hash, train_with_params, ModelFamily, ModelFile, ModelParams,
    MODEL_FORMAT_VERSION,
};
use xaieval_core::rng;

const SEED_ENV: &str = "XAIEVAL_SEED";

#[derive(Parser)]
#[command(name = "xaieval", version, about = "Benchmark local attribution quality on tabular classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full benchmark from a JSON config and write the four report
    /// files into the output directory.
    Run(RunArgs),
    /// Explain one sample of a dataset and print its attribution plus all
    /// five metric values as JSON.
    Explain(ExplainArgs),
    /// Recompute the aggregate table from raw records.
    Report(ReportArgs),
    /// Emit the correlation table and a plot-ready point cloud.
    Correlate(CorrelateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for records.jsonl, aggregate.csv, correlation.csv,
    /// and manifest.json.
    #[arg(long)]
    out: PathBuf,
    /// Master seed override (takes precedence over XAIEVAL_SEED and the
    /// config file).
    #[arg(long)]
    seed: Option<u64>,
    /// Bound the worker-thread count.
    #[arg(long)]
    parallelism: Option<usize>,
}

#[derive(Args)]
struct ExplainArgs {
    /// CSV dataset path.
    #[arg(long)]
    data: PathBuf,
    /// Target column name.
    #[arg(long)]
    target: String,
    /// Raw row index (0-based, file order) of the sample to explain.
    #[arg(long)]
    sample_index: usize,
    /// Model family: logistic | forest | boosted.
    #[arg(long, default_value = "forest")]
    model: String,
    /// Technique: lime | kernel_shap | feature_ablation.
    #[arg(long, default_value = "feature_ablation")]
    technique: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Train a model inline with mid-range default parameters.
    #[arg(long)]
    quick_train: bool,
    /// Load a previously saved model JSON instead of training.
    #[arg(long)]
    model_file: Option<PathBuf>,
    /// Save the trained model as versioned JSON.
    #[arg(long)]
    save_model: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// records.jsonl produced by `run`.
    #[arg(long)]
    records: PathBuf,
    /// csv | json
    #[arg(long, default_value = "csv")]
    format: String,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CorrelateArgs {
    /// records.jsonl produced by `run`.
    #[arg(long)]
    records: PathBuf,
    /// manifest.json produced by `run` (per-dataset summaries).
    #[arg(long)]
    summary: PathBuf,
    /// Output directory for correlation.csv and correlation_points.csv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

enum CliError {
    /// Bad configuration or arguments: exit 2.
    Config(String),
    /// Runtime failure: exit 1.
    Runtime(String),
}

impl CliError {
    fn config(e: impl std::fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    fn runtime(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Explain(args) => cmd_explain(args),
        Command::Report(args) => cmd_report(args),
        Command::Correlate(args) => cmd_correlate(args),
    };
    match outcome {
        Ok(code) => code,
        Err(CliError::Config(message)) => {
            eprintln!("config error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(text) => text
            .parse::<u64>()
            .map(Some)
            .map_err(|_| CliError::Config(format!("{SEED_ENV} must be an unsigned integer, got {text:?}"))),
        Err(_) => Ok(None),
    }
}

fn cmd_run(args: RunArgs) -> Result<ExitCode, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut config = RunConfig::from_json(&text).map_err(CliError::config)?;
    if let Some(seed) = args.seed.or(env_seed()?) {
        config.seed = seed;
    }
    if let Some(workers) = args.parallelism {
        if workers == 0 {
            return Err(CliError::Config("--parallelism must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(CliError::runtime)?;
    }

    let report = run_benchmark(&config).map_err(CliError::runtime)?;
    write_report_files(&report, &args.out).map_err(CliError::runtime)?;
    for failure in &report.manifest.failures {
        eprintln!("dataset {} failed: {}", failure.id, failure.error);
    }
    println!(
        "{} dataset(s), {} record(s), {} aggregate row(s) -> {}",
        report.manifest.datasets.len(),
        report.records.len(),
        report.aggregate.len(),
        args.out.display()
    );
    Ok(if report.has_failures() { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn cmd_explain(args: ExplainArgs) -> Result<ExitCode, CliError> {
    let family: ModelFamily = args.model.parse().map_err(CliError::Config)?;
    let technique: Technique = args.technique.parse().map_err(CliError::Config)?;
    if !args.quick_train && args.model_file.is_none() {
        return Err(CliError::Config(
            "pass --quick-train or --model-file <path> to obtain a model".into(),
        ));
    }
    let seed = args.seed.or(env_seed()?).unwrap_or(0);

    let markers: Vec<&str> = xaieval_core::data::DEFAULT_MISSING_MARKERS.to_vec();
    let table =
        load_csv_with_markers(&args.data, &args.target, &markers).map_err(CliError::runtime)?;
    if args.sample_index >= table.n_rows() {
        return Err(CliError::Runtime(format!(
            "sample index {} out of range for {} rows",
            args.sample_index,
            table.n_rows()
        )));
    }
    let schema = infer_schema(&table).map_err(CliError::runtime)?;
    let labels = target_labels(&table, &schema);
    let ds = rng::hash_str(&args.data.display().to_string());
    let split = stratified_split(&labels, 0.8, rng::derive(seed, &[ds, rng::hash_str("split")]))
        .map_err(CliError::runtime)?;
    let state = fit_preprocessor(&table, &schema, &split.train).map_err(CliError::runtime)?;
    let state_hash = preprocessing_hash(&state);
    let fm_train = transform(&state, &table, &split.train).map_err(CliError::runtime)?;
    let y_train: Vec<usize> = split.train.iter().map(|&i| labels[i]).collect();

    let model_file = match &args.model_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
            let file = ModelFile::from_json(&text).map_err(CliError::config)?;
            if file.preprocessing_hash != state_hash {
                return Err(CliError::Runtime(format!(
                    "model was trained behind preprocessing {} but this data fits {}",
                    file.preprocessing_hash, state_hash
                )));
            }
            file
        }
        None => {
            let params = ModelParams::default_for(family);
            let train_seed = rng::derive(seed, &[ds, rng::hash_str("train")]);
            let model = train_with_params(&params, &fm_train.matrix, &y_train, train_seed)
                .map_err(CliError::runtime)?;
            ModelFile {
                format_version: MODEL_FORMAT_VERSION,
                family,
                params,
                train_seed,
                preprocessing_hash: state_hash,
                model,
            }
        }
    };
    if let Some(path) = &args.save_model {
        std::fs::write(path, model_file.to_json()).map_err(CliError::runtime)?;
    }
    let model = &model_file.model;

    let sample = transform(&state, &table, &[args.sample_index]).map_err(CliError::runtime)?;
    let x = sample.matrix.row(0);
    let baseline = mean_baseline(&fm_train.matrix);
    let explain_seed = rng::derive(seed, &[ds, rng::hash_str("explain"), args.sample_index as u64]);
    let mut config = ExplainConfig::new(rng::derive(explain_seed, &[0]), baseline.clone());
    config.ablation_groups = None;

    let attribution = explain_with(technique, model, x, &config)
        .map_err(CliError::runtime)?
        .with_sample_id(args.sample_index as u64);

    let mut metrics = BTreeMap::new();
    let mut insert = |name: &str, value: Option<f64>, reason: Option<String>| {
        metrics.insert(
            name.to_string(),
            serde_json::json!({ "value": value, "reason": reason }),
        );
    };
    match faithfulness_estimate(model, x, &attribution, &config.baseline)
        .map_err(CliError::runtime)?
    {
        MetricOutcome::Value(v) => insert("faithfulness", Some(v), None),
        MetricOutcome::Missing(r) => insert("faithfulness", None, Some(r.as_str().into())),
    }
    let s = selectivity(model, x, &attribution, &config.baseline).map_err(CliError::runtime)?;
    insert("selectivity", Some(s), None);
    let metric_config = MetricConfig::new(rng::derive(seed, &[ds, rng::hash_str("metrics")]));
    let inner = |j: usize, z: &[f64]| {
        let mut c = config.clone();
        c.seed = rng::derive(explain_seed, &[j as u64]);
        explain_with(technique, model, z, &c).map(|a| a.values)
    };
    match sensitivity(inner, x, &metric_config).map_err(CliError::runtime)? {
        SensitivityOutcome::Values { avg, max, .. } => {
            insert("avg_sensitivity", Some(avg), None);
            insert("max_sensitivity", Some(max), None);
        }
        SensitivityOutcome::Missing(r) => {
            insert("avg_sensitivity", None, Some(r.as_str().into()));
            insert("max_sensitivity", None, Some(r.as_str().into()));
        }
    }
    match complexity(&attribution) {
        MetricOutcome::Value(v) => insert("complexity", Some(v), None),
        MetricOutcome::Missing(r) => insert("complexity", None, Some(r.as_str().into())),
    }

    let output = serde_json::json!({
        "dataset": args.data.display().to_string(),
        "target": args.target,
        "sample_index": args.sample_index,
        "model": family.id(),
        "technique": technique.id(),
        "class": attribution.explained_class,
        "class_label": schema.classes()[attribution.explained_class],
        "values": attribution.values,
        "feature_names": sample.feature_names,
        "note": attribution.note,
        "metrics": metrics,
        "seed": seed,
    });
    println!("{}", serde_json::to_string_pretty(&output).expect("json output"));
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(args: ReportArgs) -> Result<ExitCode, CliError> {
    let records = read_records_jsonl(&args.records).map_err(CliError::runtime)?;
    let table = aggregate(&records);
    let bytes = match args.format.as_str() {
        "csv" => report::aggregate_csv_bytes(&table).map_err(CliError::runtime)?,
        "json" => report::aggregate_json_bytes(&table).map_err(CliError::runtime)?,
        other => return Err(CliError::Config(format!("unknown format {other:?} (csv | json)"))),
    };
    write_output(args.out.as_deref(), &bytes)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_correlate(args: CorrelateArgs) -> Result<ExitCode, CliError> {
    let records = read_records_jsonl(&args.records).map_err(CliError::runtime)?;
    let manifest = report::read_manifest(&args.summary).map_err(CliError::runtime)?;
    let feature_counts: BTreeMap<String, usize> = manifest
        .datasets
        .iter()
        .map(|d| (d.id.clone(), d.feature_count))
        .collect();
    let summary =
        feature_count_correlation(&records, &feature_counts).map_err(CliError::runtime)?;

    std::fs::create_dir_all(&args.out).map_err(CliError::runtime)?;
    let table_bytes = report::correlation_csv_bytes(Some(&summary)).map_err(CliError::runtime)?;
    std::fs::write(args.out.join(report::CORRELATION_FILE), &table_bytes)
        .map_err(CliError::runtime)?;
    let points_bytes = report::points_csv_bytes(&summary).map_err(CliError::runtime)?;
    std::fs::write(args.out.join(report::POINTS_FILE), points_bytes)
        .map_err(CliError::runtime)?;
    print!("{}", String::from_utf8_lossy(&table_bytes));
    Ok(ExitCode::SUCCESS)
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(path) => std::fs::write(path, bytes).map_err(CliError::runtime),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes).map_err(CliError::runtime)
        }
    }
}
