//! Writers and readers for the four run outputs: `records.jsonl`,
//! `aggregate.csv`, `correlation.csv`, and `manifest.json`, plus the
//! plot-ready correlation point cloud.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::aggregate::{AggregateRow, BinKey};
use super::correlate::CorrelationSummary;
use super::manifest::Manifest;
use super::BenchError;
use crate::metrics::MetricId;

pub const RECORDS_FILE: &str = "records.jsonl";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const CORRELATION_FILE: &str = "correlation.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const POINTS_FILE: &str = "correlation_points.csv";

#[derive(Debug, Serialize, Deserialize)]
struct AggregateCsvRow {
    f1_bin: String,
    group: String,
    technique: String,
    metric: String,
    min: f64,
    mean: f64,
    max: f64,
    count: usize,
    missing_count: usize,
}

pub fn aggregate_csv_bytes(table: &BTreeMap<BinKey, AggregateRow>) -> Result<Vec<u8>, BenchError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for (key, row) in table {
        writer.serialize(AggregateCsvRow {
            f1_bin: key.bin.clone(),
            group: key.group.id().to_string(),
            technique: key.technique.id().to_string(),
            metric: key.metric.id().to_string(),
            min: row.min,
            mean: row.mean,
            max: row.max,
            count: row.count,
            missing_count: row.missing_count,
        })?;
    }
    Ok(writer.into_inner().expect("vec writer cannot fail"))
}

pub fn read_aggregate_csv(
    path: impl AsRef<Path>,
) -> Result<BTreeMap<BinKey, AggregateRow>, BenchError> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    let mut table = BTreeMap::new();
    for row in reader.deserialize() {
        let row: AggregateCsvRow = row?;
        let key = BinKey::new(
            row.f1_bin.clone(),
            row.group.parse().map_err(BenchError::InvalidConfig)?,
            row.technique.parse().map_err(BenchError::InvalidConfig)?,
            row.metric.parse().map_err(BenchError::InvalidConfig)?,
        );
        table.insert(
            key,
            AggregateRow {
                min: row.min,
                mean: row.mean,
                max: row.max,
                count: row.count,
                missing_count: row.missing_count,
            },
        );
    }
    Ok(table)
}

/// JSON rendering of the aggregate table for `--format json`.
pub fn aggregate_json_bytes(
    table: &BTreeMap<BinKey, AggregateRow>,
) -> Result<Vec<u8>, BenchError> {
    #[derive(Serialize)]
    struct Entry<'a> {
        f1_bin: &'a str,
        group: &'a str,
        technique: &'a str,
        metric: &'a str,
        #[serde(flatten)]
        row: &'a AggregateRow,
    }
    let entries: Vec<Entry> = table
        .iter()
        .map(|(key, row)| Entry {
            f1_bin: &key.bin,
            group: key.group.id(),
            technique: key.technique.id(),
            metric: key.metric.id(),
            row,
        })
        .collect();
    let mut bytes = serde_json::to_vec_pretty(&entries)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn correlation_csv_bytes(summary: Option<&CorrelationSummary>) -> Result<Vec<u8>, BenchError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["metric", "pearson_r", "n_datasets", "note"])?;
    if let Some(summary) = summary {
        for metric in MetricId::ALL {
            let entry = &summary.per_metric[&metric];
            writer.write_record([
                metric.id().to_string(),
                entry.r.map(|r| r.to_string()).unwrap_or_default(),
                entry.n_datasets.to_string(),
                entry.note.clone().unwrap_or_default(),
            ])?;
        }
    }
    Ok(writer.into_inner().expect("vec writer cannot fail"))
}

pub fn points_csv_bytes(summary: &CorrelationSummary) -> Result<Vec<u8>, BenchError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["metric", "dataset", "feature_count", "mean_value"])?;
    for point in &summary.points {
        writer.write_record([
            point.metric.id().to_string(),
            point.dataset.clone(),
            point.feature_count.to_string(),
            point.mean_value.to_string(),
        ])?;
    }
    Ok(writer.into_inner().expect("vec writer cannot fail"))
}

pub fn manifest_bytes(manifest: &Manifest) -> Result<Vec<u8>, BenchError> {
    let mut bytes = serde_json::to_vec_pretty(manifest)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Manifest, BenchError> {
    let text = std::fs::read_to_string(path.as_ref())?;
    Ok(serde_json::from_str(&text)?)
}
