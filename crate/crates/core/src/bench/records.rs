//! Raw metric records and their JSON-lines serialization.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::groups::ConsensusGroup;
use super::BenchError;
use crate::explain::Technique;
use crate::metrics::MetricId;

/// One metric value for one (dataset, model, technique, sample, group) tuple.
/// `value` is null with a tagged `reason` for degenerate evaluations;
/// `f1_bin` is null when the model's F1 falls below the lowest bin edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub dataset: String,
    pub model: String,
    pub f1_bin: Option<String>,
    pub group: ConsensusGroup,
    pub technique: Technique,
    pub metric: MetricId,
    pub sample_id: u64,
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl MetricRecord {
    /// Global deterministic ordering for report files.
    pub fn sort_key(&self) -> (String, String, ConsensusGroup, u64, Technique, MetricId) {
        (
            self.dataset.clone(),
            self.model.clone(),
            self.group,
            self.sample_id,
            self.technique,
            self.metric,
        )
    }
}

pub fn write_records_jsonl<W: Write>(
    mut writer: W,
    records: &[MetricRecord],
) -> Result<(), BenchError> {
    for record in records {
        serde_json::to_writer(&mut writer, record)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_records_jsonl(path: impl AsRef<Path>) -> Result<Vec<MetricRecord>, BenchError> {
    let file = std::fs::File::open(path.as_ref())?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: MetricRecord = serde_json::from_str(&line)
            .map_err(|e| BenchError::MalformedRecord { line: idx + 1, message: e.to_string() })?;
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_record() -> MetricRecord {
        MetricRecord {
            dataset: "iris-like".into(),
            model: "forest".into(),
            f1_bin: Some("90-95".into()),
            group: ConsensusGroup::Correct,
            technique: Technique::KernelShap,
            metric: MetricId::Faithfulness,
            sample_id: 13,
            value: Some(0.82),
            reason: None,
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let records = vec![
            sample_record(),
            MetricRecord {
                value: None,
                reason: Some("degenerate-correlation".into()),
                ..sample_record()
            },
        ];
        let mut buf = Vec::new();
        write_records_jsonl(&mut buf, &records).unwrap();
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(&buf).unwrap();
        let read = read_records_jsonl(file.path()).unwrap();
        assert_eq!(read, records);
    }

    #[test]
    fn reason_is_omitted_when_absent() {
        let mut buf = Vec::new();
        write_records_jsonl(&mut buf, &[sample_record()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(!text.contains("reason"));
        assert!(text.contains("\"f1_bin\":\"90-95\""));
    }

    #[test]
    fn malformed_line_reports_its_number() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        let mut buf = Vec::new();
        write_records_jsonl(&mut buf, &[sample_record()]).unwrap();
        file.write_all(&buf).unwrap();
        file.write_all(b"{not json}\n").unwrap();
        match read_records_jsonl(file.path()) {
            Err(BenchError::MalformedRecord { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected MalformedRecord, got {other:?}"),
        }
    }
}
