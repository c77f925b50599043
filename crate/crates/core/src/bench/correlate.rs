//! Correlation of per-dataset metric means with dataset feature counts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::records::MetricRecord;
use super::BenchError;
use crate::metrics::MetricId;
use crate::stats;

/// One plot-ready point: a dataset's feature count against its mean metric
/// value (faithfulness reported inverted, matching the aggregate tables).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPoint {
    pub metric: MetricId,
    pub dataset: String,
    pub feature_count: usize,
    pub mean_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricCorrelation {
    pub r: Option<f64>,
    pub n_datasets: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSummary {
    pub per_metric: BTreeMap<MetricId, MetricCorrelation>,
    pub points: Vec<CorrelationPoint>,
}

/// Pearson correlation per metric between dataset feature counts and
/// dataset-mean metric values over all present records.
pub fn feature_count_correlation(
    records: &[MetricRecord],
    feature_counts: &BTreeMap<String, usize>,
) -> Result<CorrelationSummary, BenchError> {
    if feature_counts.len() < 3 {
        return Err(BenchError::TooFewDatasets(feature_counts.len()));
    }

    let mut per_metric = BTreeMap::new();
    let mut points = Vec::new();
    for metric in MetricId::ALL {
        // dataset -> (sum, count) over present values, reported sign.
        let mut sums: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
        for record in records.iter().filter(|r| r.metric == metric) {
            let Some(value) = record.value else { continue };
            let reported = if metric == MetricId::Faithfulness { -value } else { value };
            let entry = sums.entry(record.dataset.as_str()).or_default();
            entry.0 += reported;
            entry.1 += 1;
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (dataset, (sum, count)) in &sums {
            let Some(&features) = feature_counts.get(*dataset) else {
                return Err(BenchError::InvalidConfig(format!(
                    "records mention dataset {dataset:?} missing from the summary"
                )));
            };
            let mean = sum / *count as f64;
            xs.push(features as f64);
            ys.push(mean);
            points.push(CorrelationPoint {
                metric,
                dataset: dataset.to_string(),
                feature_count: features,
                mean_value: mean,
            });
        }
        let r = stats::pearson(&xs, &ys);
        let note = if xs.len() < 2 {
            Some("fewer-than-2-datasets".to_string())
        } else if r.is_none() {
            Some("zero-variance".to_string())
        } else {
            None
        };
        per_metric.insert(metric, MetricCorrelation { r, n_datasets: xs.len(), note });
    }
    Ok(CorrelationSummary { per_metric, points })
}
