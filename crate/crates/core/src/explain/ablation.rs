//! Feature ablation: replace one feature (or one group) with the baseline and
//! measure the drop in the explained class's score.

use super::{check_sample, Attribution, ExplainError, Technique};
use crate::matrix::Matrix;
use crate::models::Predictor;
use crate::stats;

/// Attribution `values[i] = f_c(x) - f_c(x with feature i set to baseline)`,
/// where `c` is the model's argmax class at `x`. Exactly `d + 1` model
/// evaluations, issued as one batch.
pub fn explain_feature_ablation(
    model: &dyn Predictor,
    x: &[f64],
    baseline: &[f64],
) -> Result<Attribution, ExplainError> {
    let groups: Vec<Vec<usize>> = (0..x.len()).map(|i| vec![i]).collect();
    ablate(model, x, baseline, &groups, Technique::FeatureAblation)
}

/// Group variant: each listed feature group is replaced jointly and every
/// member feature receives the group's score change.
pub fn explain_feature_ablation_grouped(
    model: &dyn Predictor,
    x: &[f64],
    baseline: &[f64],
    groups: &[Vec<usize>],
) -> Result<Attribution, ExplainError> {
    ablate(model, x, baseline, groups, Technique::FeatureAblation)
}

fn ablate(
    model: &dyn Predictor,
    x: &[f64],
    baseline: &[f64],
    groups: &[Vec<usize>],
    technique: Technique,
) -> Result<Attribution, ExplainError> {
    check_sample(model, x)?;
    if baseline.len() != x.len() {
        return Err(ExplainError::DimensionMismatch { expected: x.len(), got: baseline.len() });
    }

    let mut rows = Vec::with_capacity(groups.len() + 1);
    rows.push(x.to_vec());
    for group in groups {
        let mut masked = x.to_vec();
        for &i in group {
            masked[i] = baseline[i];
        }
        rows.push(masked);
    }
    let probs = model.predict_proba(&Matrix::from_rows(rows));
    let class = stats::argmax(probs.row(0));
    let reference = probs.get(0, class);

    let mut values = vec![0.0; x.len()];
    for (g, group) in groups.iter().enumerate() {
        let delta = reference - probs.get(g + 1, class);
        for &i in group {
            values[i] = delta;
        }
    }
    Ok(Attribution {
        values,
        explained_class: class,
        technique,
        sample_id: 0,
        config_fingerprint: String::new(),
        note: None,
    })
}
