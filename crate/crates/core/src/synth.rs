//! Seeded synthetic classification tables for tests, benches, and demos.
//!
//! Rows are Gaussian blobs around per-class centers; an optional categorical
//! column correlates loosely with the label, and missing cells can be
//! injected to exercise imputation.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::rng;

#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub n_rows: usize,
    pub n_features: usize,
    pub n_classes: usize,
    pub seed: u64,
    /// Noise scale around class centers; larger means harder.
    pub noise: f64,
    /// Probability a numeric cell is blanked.
    pub missing_rate: f64,
    /// Append one categorical column correlated with the label.
    pub categorical: bool,
}

impl SynthSpec {
    pub fn new(n_rows: usize, n_features: usize, n_classes: usize, seed: u64) -> Self {
        Self {
            n_rows,
            n_features,
            n_classes,
            seed,
            noise: 1.0,
            missing_rate: 0.0,
            categorical: false,
        }
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_missing_rate(mut self, rate: f64) -> Self {
        self.missing_rate = rate;
        self
    }

    pub fn with_categorical(mut self) -> Self {
        self.categorical = true;
        self
    }
}

const COLORS: [&str; 3] = ["blue", "green", "red"];

/// Renders the table as CSV text with header `f0..f{d-1}[,color],label`.
pub fn generate_csv(spec: &SynthSpec) -> String {
    assert!(spec.n_classes >= 2, "need at least 2 classes");
    let mut stream = rng::stream(rng::derive(spec.seed, &[rng::hash_str("synth")]));
    let centers: Vec<Vec<f64>> = (0..spec.n_classes)
        .map(|_| (0..spec.n_features).map(|_| stream.random_range(-2.0..2.0)).collect())
        .collect();

    let mut out = String::new();
    for f in 0..spec.n_features {
        out.push_str(&format!("f{f},"));
    }
    if spec.categorical {
        out.push_str("color,");
    }
    out.push_str("label\n");

    for row in 0..spec.n_rows {
        let label = row % spec.n_classes;
        for center in centers[label].iter().take(spec.n_features) {
            if spec.missing_rate > 0.0 && stream.random::<f64>() < spec.missing_rate {
                out.push(',');
                continue;
            }
            let noise: f64 = StandardNormal.sample(&mut stream);
            let value = center + spec.noise * noise;
            out.push_str(&format!("{value:.6},"));
        }
        if spec.categorical {
            let color = if stream.random::<f64>() < 0.7 {
                COLORS[label % COLORS.len()]
            } else {
                COLORS[stream.random_range(0..COLORS.len())]
            };
            out.push_str(color);
            out.push(',');
        }
        out.push_str(&format!("c{label}\n"));
    }
    out
}

pub fn write_csv(spec: &SynthSpec, path: impl AsRef<std::path::Path>) -> std::io::Result<()> {
    std::fs::write(path, generate_csv(spec))
}
