//! F1 binning and min/mean/max aggregation of metric records.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::groups::ConsensusGroup;
use super::records::MetricRecord;
use crate::explain::Technique;
use crate::metrics::MetricId;

/// Assigns an F1 score to its half-open bin `[e_i, e_{i+1})`; the final bin
/// is closed on the right. Scores below the first edge are excluded.
pub fn assign_bin(f1: f64, edges: &[f64]) -> Option<String> {
    debug_assert!(edges.len() >= 2);
    if f1 < edges[0] || f1 > *edges.last().unwrap() {
        return None;
    }
    for i in 0..edges.len() - 1 {
        if f1 < edges[i + 1] || i == edges.len() - 2 {
            return Some(bin_label(edges[i], edges[i + 1]));
        }
    }
    None
}

pub fn bin_label(lower: f64, upper: f64) -> String {
    format!("{}-{}", format_pct(lower), format_pct(upper))
}

fn format_pct(edge: f64) -> String {
    let pct = edge * 100.0;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("{}", pct.round() as i64)
    } else {
        format!("{pct:.1}")
    }
}

/// Sort key for a bin label: the lower edge in tenths of a percent.
fn bin_sort_key(label: &str) -> u32 {
    label
        .split('-')
        .next()
        .and_then(|lo| lo.parse::<f64>().ok())
        .map(|lo| (lo * 10.0).round() as u32)
        .unwrap_or(u32::MAX)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BinKey {
    /// Numeric sort key so "95-100" follows "50-55" regardless of digits.
    bin_sort: u32,
    pub bin: String,
    pub group: ConsensusGroup,
    pub technique: Technique,
    pub metric: MetricId,
}

impl BinKey {
    pub fn new(bin: String, group: ConsensusGroup, technique: Technique, metric: MetricId) -> Self {
        Self { bin_sort: bin_sort_key(&bin), bin, group, technique, metric }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    /// Records contributing a value.
    pub count: usize,
    /// Records excluded for a tagged degenerate reason.
    pub missing_count: usize,
}

/// Folds records into per-(bin, group, technique, metric) min/mean/max rows.
///
/// Faithfulness values are negated here, and only here, so that lower is
/// better for every reported metric; raw records keep the original sign.
/// Records without a bin are skipped; keys whose every record is missing are
/// omitted (a mean over nothing is meaningless).
pub fn aggregate(records: &[MetricRecord]) -> BTreeMap<BinKey, AggregateRow> {
    let mut values: BTreeMap<BinKey, (Vec<f64>, usize)> = BTreeMap::new();
    for record in records {
        let Some(bin) = &record.f1_bin else { continue };
        let key = BinKey::new(bin.clone(), record.group, record.technique, record.metric);
        let entry = values.entry(key).or_default();
        match record.value {
            Some(v) => {
                let reported = if record.metric == MetricId::Faithfulness { -v } else { v };
                entry.0.push(reported);
            }
            None => entry.1 += 1,
        }
    }

    values
        .into_iter()
        .filter(|(_, (vals, _))| !vals.is_empty())
        .map(|(key, (vals, missing_count))| {
            let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            (key, AggregateRow { min, mean, max, count: vals.len(), missing_count })
        })
        .collect()
}
