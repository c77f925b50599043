//! Raw tabular data: CSV loading, column-type inference, and the domain
//! invariants every downstream stage relies on.

mod preprocess;
mod split;

pub use preprocess::{fit_preprocessor, transform, FeatureMatrix, FittedColumn, PreprocessorState};
pub use split::{stratified_split, SplitIndices};

use std::path::Path;

use thiserror::Error;

/// Cell markers treated as missing after whitespace trimming.
pub const DEFAULT_MISSING_MARKERS: &[&str] = &["", "NA", "?"];

#[derive(Debug, Error)]
pub enum DataError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv parse error: {0}")]
    Csv(#[from] csv::Error),
    #[error("file has no data rows")]
    EmptyFile,
    #[error("target column {0:?} not found in header")]
    MissingTarget(String),
    #[error("target column has a missing value at row {0}")]
    TargetMissingValue(usize),
    #[error("table needs at least 2 rows, got {0}")]
    InsufficientRows(usize),
    #[error("target column has fewer than 2 distinct values")]
    SingleClassTarget,
    #[error("column {0:?} has no non-missing cells")]
    EmptyColumn(String),
    #[error("column {0:?} has no non-missing training cells")]
    EmptyColumnInTrain(String),
    #[error("column {0:?} expected by the preprocessor is absent")]
    ColumnMismatch(String),
    #[error("split ratio must be in (0, 1), got {0}")]
    InvalidRatio(f64),
    #[error("schema and table have different column counts")]
    SchemaMismatch,
}

/// One named column of raw cells; `None` marks a missing value.
#[derive(Debug, Clone)]
pub struct RawColumn {
    pub name: String,
    pub cells: Vec<Option<String>>,
}

/// A parsed table plus the designated target column.
///
/// Construction enforces the structural invariants: rectangular shape, a
/// fully-observed target, at least two rows and two distinct target values.
#[derive(Debug, Clone)]
pub struct RawTable {
    columns: Vec<RawColumn>,
    target_idx: usize,
    n_rows: usize,
}

impl RawTable {
    pub fn new(columns: Vec<RawColumn>, target_name: &str) -> Result<Self, DataError> {
        let target_idx = columns
            .iter()
            .position(|c| c.name == target_name)
            .ok_or_else(|| DataError::MissingTarget(target_name.to_string()))?;
        let n_rows = columns[target_idx].cells.len();
        debug_assert!(columns.iter().all(|c| c.cells.len() == n_rows));
        if let Some(row) = columns[target_idx].cells.iter().position(Option::is_none) {
            return Err(DataError::TargetMissingValue(row));
        }
        if n_rows < 2 {
            return Err(DataError::InsufficientRows(n_rows));
        }
        let mut labels: Vec<&str> = columns[target_idx]
            .cells
            .iter()
            .map(|c| c.as_deref().unwrap())
            .collect();
        labels.sort_unstable();
        labels.dedup();
        if labels.len() < 2 {
            return Err(DataError::SingleClassTarget);
        }
        Ok(Self { columns, target_idx, n_rows })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn columns(&self) -> &[RawColumn] {
        &self.columns
    }

    pub fn target_idx(&self) -> usize {
        self.target_idx
    }

    pub fn target_name(&self) -> &str {
        &self.columns[self.target_idx].name
    }

    pub fn column_by_name(&self, name: &str) -> Option<&RawColumn> {
        self.columns.iter().find(|c| c.name == name)
    }
}

/// Column role assigned by [`infer_schema`].
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnKind {
    Numeric,
    Categorical { vocabulary: Vec<String> },
    Target { classes: Vec<String> },
}

/// Per-column kinds, aligned with [`RawTable::columns`].
#[derive(Debug, Clone)]
pub struct ColumnSchema {
    pub kinds: Vec<ColumnKind>,
}

impl ColumnSchema {
    /// Class labels of the target column, lexicographically sorted.
    pub fn classes(&self) -> &[String] {
        self.kinds
            .iter()
            .find_map(|k| match k {
                ColumnKind::Target { classes } => Some(classes.as_slice()),
                _ => None,
            })
            .expect("schema always contains a target column")
    }

    pub fn n_classes(&self) -> usize {
        self.classes().len()
    }
}

/// Loads a comma-delimited CSV with a header row, using the default missing
/// markers (empty cell, `NA`, `?`).
pub fn load_csv(path: impl AsRef<Path>, target_name: &str) -> Result<RawTable, DataError> {
    load_csv_with_markers(path, target_name, DEFAULT_MISSING_MARKERS)
}

/// [`load_csv`] with caller-chosen missing markers.
pub fn load_csv_with_markers(
    path: impl AsRef<Path>,
    target_name: &str,
    missing_markers: &[&str],
) -> Result<RawTable, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    if headers.is_empty() {
        return Err(DataError::EmptyFile);
    }
    let mut columns: Vec<RawColumn> = headers
        .iter()
        .map(|h| RawColumn { name: h.to_string(), cells: Vec::new() })
        .collect();
    for record in reader.records() {
        let record = record?; // ragged rows surface here as UnequalLengths
        for (col, cell) in columns.iter_mut().zip(record.iter()) {
            if missing_markers.contains(&cell) {
                col.cells.push(None);
            } else {
                col.cells.push(Some(cell.to_string()));
            }
        }
    }
    if columns[0].cells.is_empty() {
        return Err(DataError::EmptyFile);
    }
    RawTable::new(columns, target_name)
}

/// Assigns a kind to every column: numeric iff every non-missing cell parses
/// as a finite real, categorical otherwise, and the target becomes an ordered
/// class list.
pub fn infer_schema(table: &RawTable) -> Result<ColumnSchema, DataError> {
    let mut kinds = Vec::with_capacity(table.columns.len());
    for (idx, col) in table.columns.iter().enumerate() {
        let observed: Vec<&str> =
            col.cells.iter().filter_map(|c| c.as_deref()).collect();
        if observed.is_empty() {
            return Err(DataError::EmptyColumn(col.name.clone()));
        }
        if idx == table.target_idx {
            kinds.push(ColumnKind::Target { classes: sorted_distinct(&observed) });
            continue;
        }
        let numeric = observed.iter().all(|c| parses_finite(c));
        if numeric {
            kinds.push(ColumnKind::Numeric);
        } else {
            kinds.push(ColumnKind::Categorical { vocabulary: sorted_distinct(&observed) });
        }
    }
    Ok(ColumnSchema { kinds })
}

/// Class index per row, following the schema's sorted class order.
pub fn target_labels(table: &RawTable, schema: &ColumnSchema) -> Vec<usize> {
    let classes = schema.classes();
    table.columns[table.target_idx]
        .cells
        .iter()
        .map(|c| {
            let label = c.as_deref().expect("target has no missing values");
            classes
                .iter()
                .position(|k| k == label)
                .expect("label observed during schema inference")
        })
        .collect()
}

pub(crate) fn parses_finite(cell: &str) -> bool {
    cell.parse::<f64>().map(|v| v.is_finite()).unwrap_or(false)
}

fn sorted_distinct(values: &[&str]) -> Vec<String> {
    let mut v: Vec<String> = values.iter().map(|s| s.to_string()).collect();
    v.sort_unstable();
    v.dedup();
    v
}
