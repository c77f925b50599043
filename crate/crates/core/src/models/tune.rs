//! Seeded random search over the per-family hyperparameter spaces, scored by
//! macro-F1 on one stratified validation split of the training partition.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    eval_scores, train_boosted, train_forest, train_logistic, BoostedModel, BoostedParams,
    ForestModel, ForestParams, LogisticModel, MaxFeatures, ModelError, Predictor,
};
use crate::data::stratified_split;
use crate::matrix::Matrix;
use crate::{exec, rng};

pub const DEFAULT_TRIALS: usize = 30;
const LOGISTIC_MAX_ITER: usize = 1000;
const VALIDATION_RATIO: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    Logistic,
    Forest,
    Boosted,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 3] =
        [ModelFamily::Logistic, ModelFamily::Forest, ModelFamily::Boosted];

    pub fn id(&self) -> &'static str {
        match self {
            ModelFamily::Logistic => "logistic",
            ModelFamily::Forest => "forest",
            ModelFamily::Boosted => "boosted",
        }
    }
}

impl std::str::FromStr for ModelFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "logistic" => Ok(ModelFamily::Logistic),
            "forest" => Ok(ModelFamily::Forest),
            "boosted" => Ok(ModelFamily::Boosted),
            other => Err(format!("unknown model family {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelParams {
    Logistic { c: f64 },
    Forest(ForestParams),
    Boosted(BoostedParams),
}

impl ModelParams {
    pub fn family(&self) -> ModelFamily {
        match self {
            ModelParams::Logistic { .. } => ModelFamily::Logistic,
            ModelParams::Forest(_) => ModelFamily::Forest,
            ModelParams::Boosted(_) => ModelFamily::Boosted,
        }
    }

    /// Mid-range defaults, for quick untuned fits.
    pub fn default_for(family: ModelFamily) -> Self {
        match family {
            ModelFamily::Logistic => ModelParams::Logistic { c: 1.0 },
            ModelFamily::Forest => ModelParams::Forest(ForestParams::default()),
            ModelFamily::Boosted => ModelParams::Boosted(BoostedParams::default()),
        }
    }
}

/// One trained model of any family, usable wherever a [`Predictor`] is.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TrainedModel {
    Logistic(LogisticModel),
    Forest(ForestModel),
    Boosted(BoostedModel),
}

impl Predictor for TrainedModel {
    fn n_classes(&self) -> usize {
        match self {
            TrainedModel::Logistic(m) => m.n_classes(),
            TrainedModel::Forest(m) => m.n_classes(),
            TrainedModel::Boosted(m) => m.n_classes(),
        }
    }

    fn n_features(&self) -> usize {
        match self {
            TrainedModel::Logistic(m) => m.n_features(),
            TrainedModel::Forest(m) => m.n_features(),
            TrainedModel::Boosted(m) => m.n_features(),
        }
    }

    fn predict_proba(&self, x: &Matrix) -> Matrix {
        match self {
            TrainedModel::Logistic(m) => m.predict_proba(x),
            TrainedModel::Forest(m) => m.predict_proba(x),
            TrainedModel::Boosted(m) => m.predict_proba(x),
        }
    }
}

/// Trains one model with explicit parameters.
pub fn train_with_params(
    params: &ModelParams,
    x: &Matrix,
    y: &[usize],
    seed: u64,
) -> Result<TrainedModel, ModelError> {
    match params {
        ModelParams::Logistic { c } => {
            train_logistic(x, y, *c, LOGISTIC_MAX_ITER).map(TrainedModel::Logistic)
        }
        ModelParams::Forest(p) => train_forest(x, y, p, seed).map(TrainedModel::Forest),
        ModelParams::Boosted(p) => train_boosted(x, y, p, seed).map(TrainedModel::Boosted),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub params: ModelParams,
    pub validation_f1: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct TuneOutcome {
    pub best: ModelParams,
    pub best_trial: usize,
    pub trials: Vec<TrialResult>,
}

/// Runs `n_trials` uniform draws from the family's search space; ties on
/// validation macro-F1 keep the earliest trial.
pub fn tune(
    family: ModelFamily,
    x: &Matrix,
    y: &[usize],
    n_trials: usize,
    seed: u64,
) -> Result<TuneOutcome, ModelError> {
    if n_trials < 1 {
        return Err(ModelError::InvalidParam("n_trials must be >= 1".into()));
    }
    let split = stratified_split(y, VALIDATION_RATIO, rng::derive(seed, &[rng::hash_str("tune-split")]))
        .expect("validation ratio is fixed and valid");
    let x_fit = x.select_rows(&split.train);
    let y_fit: Vec<usize> = split.train.iter().map(|&i| y[i]).collect();
    let x_val = x.select_rows(&split.test);
    let y_val: Vec<usize> = split.test.iter().map(|&i| y[i]).collect();

    let trials: Vec<TrialResult> = exec::map_indexed(n_trials, |trial| {
        let params = sample_params(family, rng::derive(seed, &[rng::hash_str("trial"), trial as u64]));
        let train_seed = rng::derive(seed, &[rng::hash_str("trial-train"), trial as u64]);
        let validation_f1 = train_with_params(&params, &x_fit, &y_fit, train_seed)
            .and_then(|model| {
                let preds = model.predict_classes(&x_val);
                eval_scores(&y_val, &preds)
            })
            .map(|scores| scores.f1)
            .unwrap_or(f64::NEG_INFINITY);
        TrialResult { trial, params, validation_f1, seed: train_seed }
    });

    let mut best_trial = 0;
    for (i, t) in trials.iter().enumerate() {
        if t.validation_f1 > trials[best_trial].validation_f1 {
            best_trial = i;
        }
    }
    Ok(TuneOutcome { best: trials[best_trial].params.clone(), best_trial, trials })
}

fn sample_params(family: ModelFamily, seed: u64) -> ModelParams {
    let mut r = rng::stream(seed);
    match family {
        ModelFamily::Logistic => ModelParams::Logistic { c: r.random_range(0.1..=10.0) },
        ModelFamily::Forest => {
            let n_trees = 25 * r.random_range(1..=6usize);
            let max_depth = match r.random_range(0..=5usize) {
                0 => None,
                k => Some(k + 2), // 3..=7
            };
            let max_features = match r.random_range(0..3usize) {
                0 => MaxFeatures::Sqrt,
                1 => MaxFeatures::Fixed(5),
                _ => MaxFeatures::Fixed(10),
            };
            ModelParams::Forest(ForestParams {
                n_trees,
                max_depth,
                max_features,
                min_samples_split: r.random_range(2..=5usize),
                min_samples_leaf: r.random_range(1..=2usize),
                bootstrap: true,
            })
        }
        ModelFamily::Boosted => ModelParams::Boosted(BoostedParams {
            max_depth: r.random_range(2..=4usize),
            learning_rate: r.random_range(0.03..=0.10),
            n_trees: r.random_range(50..=300usize),
            subsample: r.random_range(0.7..=1.0),
            colsample: r.random_range(0.7..=1.0),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> (Matrix, Vec<usize>) {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..30 {
            let v = (i as f64 - 14.5) / 8.0;
            rows.push(vec![v, -v * 0.5]);
            y.push(usize::from(v > 0.0));
        }
        (Matrix::from_rows(rows), y)
    }

    #[test]
    fn single_trial_returns_its_params() {
        let (x, y) = data();
        let outcome = tune(ModelFamily::Logistic, &x, &y, 1, 5).unwrap();
        assert_eq!(outcome.trials.len(), 1);
        assert_eq!(outcome.best, outcome.trials[0].params);
    }

    #[test]
    fn ties_keep_the_earliest_trial() {
        // Separable data: every logistic trial reaches validation F1 = 1.
        let (x, y) = data();
        let outcome = tune(ModelFamily::Logistic, &x, &y, 5, 5).unwrap();
        let top = outcome.trials.iter().map(|t| t.validation_f1).fold(f64::MIN, f64::max);
        assert_eq!(outcome.trials[0].validation_f1, top);
        assert_eq!(outcome.best_trial, 0);
    }

    #[test]
    fn sampled_params_stay_in_search_spaces() {
        let (x, y) = data();
        for (family, seed) in
            [(ModelFamily::Logistic, 1), (ModelFamily::Forest, 2), (ModelFamily::Boosted, 3)]
        {
            let outcome = tune(family, &x, &y, 12, seed).unwrap();
            for t in &outcome.trials {
                match &t.params {
                    ModelParams::Logistic { c } => assert!((0.1..=10.0).contains(c)),
                    ModelParams::Forest(p) => {
                        assert!(p.n_trees % 25 == 0 && (25..=150).contains(&p.n_trees));
                        if let Some(d) = p.max_depth {
                            assert!((3..=7).contains(&d));
                        }
                        assert!((2..=5).contains(&p.min_samples_split));
                        assert!((1..=2).contains(&p.min_samples_leaf));
                        assert!(matches!(
                            p.max_features,
                            MaxFeatures::Sqrt | MaxFeatures::Fixed(5) | MaxFeatures::Fixed(10)
                        ));
                    }
                    ModelParams::Boosted(p) => {
                        assert!((2..=4).contains(&p.max_depth));
                        assert!((0.03..=0.10).contains(&p.learning_rate));
                        assert!((50..=300).contains(&p.n_trees));
                        assert!((0.7..=1.0).contains(&p.subsample));
                        assert!((0.7..=1.0).contains(&p.colsample));
                    }
                }
            }
        }
    }

    #[test]
    fn zero_trials_is_an_error() {
        let (x, y) = data();
        assert!(matches!(
            tune(ModelFamily::Logistic, &x, &y, 0, 1),
            Err(ModelError::InvalidParam(_))
        ));
    }

    #[test]
    fn tuning_is_deterministic() {
        let (x, y) = data();
        let a = tune(ModelFamily::Boosted, &x, &y, 4, 9).unwrap();
        let b = tune(ModelFamily::Boosted, &x, &y, 4, 9).unwrap();
        assert_eq!(a.trials, b.trials);
    }
}
