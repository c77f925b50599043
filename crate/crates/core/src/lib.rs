//! Train tabular classifiers, produce local feature attributions, and score
//! those attributions with quantitative quality metrics.
//!
//! The crate is organized around one pipeline:
//!
//! 1. [`data`] loads CSV tables, infers column types, fits a train-only
//!    preprocessor (z-score + one-hot + imputation) and produces stratified
//!    splits.
//! 2. [`models`] trains logistic regression, random forests, and boosted
//!    trees behind the shared [`models::Predictor`] contract, with seeded
//!    random-search tuning.
//! 3. [`explain`] computes per-sample attributions with LIME, Kernel SHAP,
//!    or feature ablation against any predictor.
//! 4. [`metrics`] scores a single attribution with faithfulness, selectivity,
//!    average/max sensitivity, and complexity.
//! 5. [`bench`] orchestrates the whole experiment: consensus groups, per-class
//!    sampling, F1 bins, min/mean/max aggregation, feature-count correlation,
//!    and reproducible report files.
//!
//! Everything is deterministic under a fixed master seed, including parallel
//! execution (enabled by the default `parallel` feature; disable it for a
//! fully sequential build).

pub mod bench;
pub mod data;
pub mod exec;
pub mod explain;
pub mod matrix;
pub mod metrics;
pub mod models;
pub mod rng;
pub mod stats;
pub mod synth;

pub use matrix::Matrix;
