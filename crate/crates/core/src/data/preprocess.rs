//! Train-only preprocessing: median/mode imputation, z-score standardization,
//! and one-hot encoding over the training vocabulary.

use serde::{Deserialize, Serialize};

use super::{parses_finite, ColumnKind, ColumnSchema, DataError, RawTable};
use crate::matrix::Matrix;
use crate::stats;

/// Numeric standard deviations are clamped below by this to keep constant
/// columns finite under the z-score transform.
pub const STD_FLOOR: f64 = 1e-12;

/// Fitted parameters for one raw column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedColumn {
    Numeric {
        name: String,
        mean: f64,
        std: f64,
        median: f64,
    },
    Categorical {
        name: String,
        /// Sorted distinct training values; fixes the one-hot width.
        vocabulary: Vec<String>,
        /// Most frequent training value; ties pick the lexicographically
        /// smallest.
        mode: String,
    },
}

impl FittedColumn {
    pub fn name(&self) -> &str {
        match self {
            FittedColumn::Numeric { name, .. } | FittedColumn::Categorical { name, .. } => name,
        }
    }

    fn width(&self) -> usize {
        match self {
            FittedColumn::Numeric { .. } => 1,
            FittedColumn::Categorical { vocabulary, .. } => vocabulary.len(),
        }
    }
}

/// All statistics come from training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessorState {
    pub columns: Vec<FittedColumn>,
}

impl PreprocessorState {
    /// Total encoded feature count: one per numeric column plus the
    /// vocabulary size of each categorical column.
    pub fn n_features(&self) -> usize {
        self.columns.iter().map(FittedColumn::width).sum()
    }
}

/// Dense design matrix plus provenance back to the raw columns.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    pub matrix: Matrix,
    pub feature_names: Vec<String>,
    /// For each encoded feature, the index of the raw column it came from.
    pub source_column: Vec<usize>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.matrix.n_cols()
    }

    /// Encoded feature indices grouped by raw source column, in column order.
    pub fn source_groups(&self) -> Vec<Vec<usize>> {
        let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
        for (feat, &src) in self.source_column.iter().enumerate() {
            match groups.last_mut() {
                Some((s, g)) if *s == src => g.push(feat),
                _ => groups.push((src, vec![feat])),
            }
        }
        groups.into_iter().map(|(_, g)| g).collect()
    }
}

/// Fits imputation, standardization, and one-hot vocabularies on the training
/// rows of `table`.
///
/// Numeric columns are imputed with the train median first; mean and the
/// population standard deviation are then taken over the imputed column, so
/// transforming the training rows yields exactly zero mean.
pub fn fit_preprocessor(
    table: &RawTable,
    schema: &ColumnSchema,
    train_indices: &[usize],
) -> Result<PreprocessorState, DataError> {
    if schema.kinds.len() != table.columns().len() {
        return Err(DataError::SchemaMismatch);
    }
    let mut columns = Vec::new();
    for (col, kind) in table.columns().iter().zip(&schema.kinds) {
        match kind {
            ColumnKind::Target { .. } => continue,
            ColumnKind::Numeric => {
                let observed: Vec<f64> = train_indices
                    .iter()
                    .filter_map(|&i| col.cells[i].as_deref())
                    .filter_map(|c| c.parse::<f64>().ok())
                    .collect();
                if observed.is_empty() {
                    return Err(DataError::EmptyColumnInTrain(col.name.clone()));
                }
                let median = stats::median(&observed);
                let imputed: Vec<f64> = train_indices
                    .iter()
                    .map(|&i| {
                        col.cells[i]
                            .as_deref()
                            .and_then(|c| c.parse::<f64>().ok())
                            .unwrap_or(median)
                    })
                    .collect();
                let mean = stats::mean(&imputed);
                let std = stats::population_std(&imputed).max(STD_FLOOR);
                columns.push(FittedColumn::Numeric { name: col.name.clone(), mean, std, median });
            }
            ColumnKind::Categorical { .. } => {
                let observed: Vec<&str> = train_indices
                    .iter()
                    .filter_map(|&i| col.cells[i].as_deref())
                    .collect();
                if observed.is_empty() {
                    return Err(DataError::EmptyColumnInTrain(col.name.clone()));
                }
                let mut vocabulary: Vec<String> =
                    observed.iter().map(|s| s.to_string()).collect();
                vocabulary.sort_unstable();
                vocabulary.dedup();
                // First strict maximum over the sorted vocabulary, so ties
                // resolve to the lexicographically smallest value.
                let mut mode = vocabulary[0].clone();
                let mut best = 0usize;
                for v in &vocabulary {
                    let count = observed.iter().filter(|o| *o == &v.as_str()).count();
                    if count > best {
                        best = count;
                        mode = v.clone();
                    }
                }
                columns.push(FittedColumn::Categorical {
                    name: col.name.clone(),
                    vocabulary,
                    mode,
                });
            }
        }
    }
    Ok(PreprocessorState { columns })
}

/// Applies a fitted preprocessor to the chosen rows.
///
/// Unseen categorical values encode as an all-zero one-hot group and emit a
/// warning through the `log` facade.
pub fn transform(
    state: &PreprocessorState,
    table: &RawTable,
    indices: &[usize],
) -> Result<FeatureMatrix, DataError> {
    let d = state.n_features();
    let mut matrix = Matrix::zeros(indices.len(), d);
    let mut feature_names = Vec::with_capacity(d);
    let mut source_column = Vec::with_capacity(d);

    let mut offset = 0usize;
    for fitted in &state.columns {
        let source_idx = table
            .columns()
            .iter()
            .position(|c| c.name == fitted.name())
            .ok_or_else(|| DataError::ColumnMismatch(fitted.name().to_string()))?;
        let col = &table.columns()[source_idx];
        match fitted {
            FittedColumn::Numeric { name, mean, std, median } => {
                feature_names.push(name.clone());
                source_column.push(source_idx);
                for (row, &i) in indices.iter().enumerate() {
                    let raw = match col.cells[i].as_deref() {
                        Some(c) if parses_finite(c) => c.parse::<f64>().unwrap(),
                        Some(c) => {
                            log::warn!(
                                "column {name:?}: unparseable numeric cell {c:?}; imputing median"
                            );
                            *median
                        }
                        None => *median,
                    };
                    matrix.set(row, offset, (raw - mean) / std);
                }
                offset += 1;
            }
            FittedColumn::Categorical { name, vocabulary, mode } => {
                for v in vocabulary {
                    feature_names.push(format!("{name}={v}"));
                    source_column.push(source_idx);
                }
                for (row, &i) in indices.iter().enumerate() {
                    let value = col.cells[i].as_deref().unwrap_or(mode.as_str());
                    match vocabulary.iter().position(|v| v == value) {
                        Some(j) => matrix.set(row, offset + j, 1.0),
                        None => {
                            log::warn!(
                                "column {name:?}: unseen category {value:?}; encoding zero group"
                            );
                        }
                    }
                }
                offset += vocabulary.len();
            }
        }
    }
    Ok(FeatureMatrix { matrix, feature_names, source_column })
}
