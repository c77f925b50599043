//! LIME with Gaussian perturbations in standardized space and a weighted
//! ridge surrogate.

use rand_distr::{Distribution, StandardNormal};

use super::{argmax_class, check_sample, solve, Attribution, ExplainConfig, ExplainError, Technique};
use crate::matrix::Matrix;
use crate::models::Predictor;
use crate::rng;

/// The perturbation set `z_j = x + eps_j`, `eps` standard normal per
/// coordinate. Exposed so oracles can regress on the identical cloud.
pub fn perturbation_cloud(x: &[f64], n_samples: usize, seed: u64) -> Matrix {
    let mut stream = rng::stream(seed);
    let rows: Vec<Vec<f64>> = (0..n_samples)
        .map(|_| {
            x.iter()
                .map(|v| v + <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut stream))
                .collect()
        })
        .collect();
    Matrix::from_rows(rows)
}

/// Fits a weighted ridge surrogate of the explained class's probability over
/// a Gaussian perturbation cloud. Similarity weights follow
/// `exp(-||x - z||^2 / (2 w^2))`; the intercept is unpenalized and the fitted
/// coefficients are the attribution.
pub fn explain_lime(
    model: &dyn Predictor,
    x: &[f64],
    config: &ExplainConfig,
) -> Result<Attribution, ExplainError> {
    config.validate()?;
    check_sample(model, x)?;
    if config.n_samples < 2 {
        return Err(ExplainError::TooFewSamples(config.n_samples));
    }

    let class = argmax_class(model, x);
    let cloud = perturbation_cloud(x, config.n_samples, config.seed);
    let probs = model.predict_proba(&cloud);
    let targets: Vec<f64> = (0..cloud.n_rows()).map(|j| probs.get(j, class)).collect();
    let weights: Vec<f64> = (0..cloud.n_rows())
        .map(|j| {
            let dist2: f64 =
                cloud.row(j).iter().zip(x).map(|(z, v)| (z - v) * (z - v)).sum();
            (-dist2 / (2.0 * config.kernel_width * config.kernel_width)).exp()
        })
        .collect();

    let values = solve::weighted_ridge(&cloud, &targets, &weights, config.ridge_lambda)
        .ok_or(ExplainError::SingularSystem)?;
    Ok(Attribution {
        values,
        explained_class: class,
        technique: Technique::Lime,
        sample_id: 0,
        config_fingerprint: config.fingerprint(Technique::Lime),
        note: None,
    })
}
