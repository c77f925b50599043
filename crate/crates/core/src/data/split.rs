//! Stratified train/test splitting with per-class seeded shuffles.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::DataError;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

/// Splits row indices so each class lands in train with probability `ratio`.
///
/// Per class with `n_c` members, train receives `round(ratio * n_c)` members
/// clamped to `[1, n_c - 1]`; singleton classes go entirely to train with a
/// warning. Selection within a class uses a shuffle seeded from
/// `(seed, class)`, so results do not depend on evaluation order.
pub fn stratified_split(
    labels: &[usize],
    ratio: f64,
    seed: u64,
) -> Result<SplitIndices, DataError> {
    if !(0.0 < ratio && ratio < 1.0) {
        return Err(DataError::InvalidRatio(ratio));
    }
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();

    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in classes {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| (l == class).then_some(i))
            .collect();
        if members.len() < 2 {
            log::warn!("class {class} has {} member(s); placing in train", members.len());
            train.extend(members);
            continue;
        }
        let mut stream = rng::stream(rng::derive(seed, &[rng::hash_str("split"), class as u64]));
        members.shuffle(&mut stream);
        let n_c = members.len();
        let n_train = ((ratio * n_c as f64).round() as usize).clamp(1, n_c - 1);
        train.extend_from_slice(&members[..n_train]);
        test.extend_from_slice(&members[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices { train, test, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_counts_follow_rounding() {
        // 6 of class 0, 4 of class 1: round(4.8)=5 and round(3.2)=3 in train.
        let labels = vec![0, 0, 0, 0, 0, 0, 1, 1, 1, 1];
        let s = stratified_split(&labels, 0.8, 7).unwrap();
        let train_a = s.train.iter().filter(|&&i| labels[i] == 0).count();
        let train_b = s.train.iter().filter(|&&i| labels[i] == 1).count();
        assert_eq!((train_a, train_b), (5, 3));
        assert_eq!(s.test.len(), 2);
    }

    #[test]
    fn two_member_class_spans_both_partitions() {
        let labels = vec![0, 0, 0, 0, 1, 1];
        let s = stratified_split(&labels, 0.8, 1).unwrap();
        let test_b = s.test.iter().filter(|&&i| labels[i] == 1).count();
        assert_eq!(test_b, 1);
    }

    #[test]
    fn same_seed_same_split() {
        let labels = vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 0];
        let a = stratified_split(&labels, 0.8, 42).unwrap();
        let b = stratified_split(&labels, 0.8, 42).unwrap();
        assert_eq!(a, b);
        let c = stratified_split(&labels, 0.8, 43).unwrap();
        assert!(a.train != c.train || a.test != c.test);
    }

    #[test]
    fn partitions_are_disjoint_and_cover() {
        let labels = vec![0, 1, 2, 0, 1, 2, 0, 1, 2, 0];
        let s = stratified_split(&labels, 0.7, 5).unwrap();
        let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
    }

    #[test]
    fn singleton_class_goes_to_train() {
        let labels = vec![0, 0, 0, 1];
        let s = stratified_split(&labels, 0.8, 3).unwrap();
        assert!(s.train.contains(&3));
    }

    #[test]
    fn invalid_ratio_is_an_error() {
        assert!(matches!(stratified_split(&[0, 1], 1.0, 0), Err(DataError::InvalidRatio(_))));
        assert!(matches!(stratified_split(&[0, 1], 0.0, 0), Err(DataError::InvalidRatio(_))));
    }
}
