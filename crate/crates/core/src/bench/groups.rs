//! Consensus groups over the test partition and the fixed per-class sample
//! selection reused by every model, technique, and metric.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsensusGroup {
    Correct,
    Wrong,
}

impl ConsensusGroup {
    pub const ALL: [ConsensusGroup; 2] = [ConsensusGroup::Correct, ConsensusGroup::Wrong];

    pub fn id(&self) -> &'static str {
        match self {
            ConsensusGroup::Correct => "correct",
            ConsensusGroup::Wrong => "wrong",
        }
    }
}

impl std::str::FromStr for ConsensusGroup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "correct" => Ok(ConsensusGroup::Correct),
            "wrong" => Ok(ConsensusGroup::Wrong),
            other => Err(format!("unknown consensus group {other:?}")),
        }
    }
}

/// Disjoint index sets over the test partition: `correct` holds samples every
/// model classifies right, `wrong` those every model classifies wrong.
/// Samples with mixed model outcomes belong to neither.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsensusGroups {
    pub correct: Vec<usize>,
    pub wrong: Vec<usize>,
}

impl ConsensusGroups {
    pub fn of(&self, group: ConsensusGroup) -> &[usize] {
        match group {
            ConsensusGroup::Correct => &self.correct,
            ConsensusGroup::Wrong => &self.wrong,
        }
    }
}

pub fn consensus_groups(
    predictions: &[Vec<usize>],
    y_true: &[usize],
) -> Result<ConsensusGroups, BenchError> {
    if predictions.is_empty() {
        return Err(BenchError::InvalidConfig("consensus needs at least one model".into()));
    }
    for preds in predictions {
        if preds.len() != y_true.len() {
            return Err(BenchError::InvalidConfig(format!(
                "prediction vector length {} does not match {} labels",
                preds.len(),
                y_true.len()
            )));
        }
    }
    let mut correct = Vec::new();
    let mut wrong = Vec::new();
    for (i, &truth) in y_true.iter().enumerate() {
        if predictions.iter().all(|p| p[i] == truth) {
            correct.push(i);
        } else if predictions.iter().all(|p| p[i] != truth) {
            wrong.push(i);
        }
    }
    Ok(ConsensusGroups { correct, wrong })
}

/// Selects up to `k` members per class from `group` by a seeded per-class
/// shuffle. Output order is (class ascending, draw order), so the selection
/// is identical however many callers reuse it.
pub fn sample_per_class(group: &[usize], labels: &[usize], k: usize, seed: u64) -> Vec<usize> {
    assert!(k >= 1, "per-class sample count must be >= 1");
    if group.is_empty() {
        log::info!("empty consensus group; nothing to sample");
        return Vec::new();
    }
    let mut classes: Vec<usize> = group.iter().map(|&i| labels[i]).collect();
    classes.sort_unstable();
    classes.dedup();

    let mut selected = Vec::new();
    for class in classes {
        let mut members: Vec<usize> =
            group.iter().copied().filter(|&i| labels[i] == class).collect();
        let mut stream =
            rng::stream(rng::derive(seed, &[rng::hash_str("sample-class"), class as u64]));
        members.shuffle(&mut stream);
        selected.extend(members.into_iter().take(k));
    }
    selected
}
