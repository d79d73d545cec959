//! Tabular datasets, their `info.json` metadata, and design-matrix encoding.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One cell of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Numeric(f64),
    Text(String),
    Missing,
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Numeric(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    /// Canonical CSV text. Missing cells render as the empty field.
    pub fn to_field(&self) -> String {
        match self {
            Cell::Numeric(v) => format!("{v}"),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    /// Total order used for sorting value multisets: missing < numeric < text.
    pub fn total_cmp(&self, other: &Cell) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match (self, other) {
            (Cell::Missing, Cell::Missing) => Equal,
            (Cell::Missing, _) => Less,
            (_, Cell::Missing) => Greater,
            (Cell::Numeric(a), Cell::Numeric(b)) => a.total_cmp(b),
            (Cell::Numeric(_), Cell::Text(_)) => Less,
            (Cell::Text(_), Cell::Numeric(_)) => Greater,
            (Cell::Text(a), Cell::Text(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_field())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<Cell>,
}

impl Column {
    pub fn new(name: impl Into<String>, values: Vec<Cell>) -> Self {
        Column {
            name: name.into(),
            values,
        }
    }

    /// A column is numeric when it holds no text cells (an all-missing column
    /// counts as numeric).
    pub fn kind(&self) -> ColumnKind {
        if self.values.iter().any(|c| matches!(c, Cell::Text(_))) {
            ColumnKind::Categorical
        } else {
            ColumnKind::Numeric
        }
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|c| c.is_missing()).count()
    }

    /// Distinct non-missing text levels in lexicographic order.
    pub fn levels(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self
            .values
            .iter()
            .filter_map(|c| match c {
                Cell::Text(s) => Some(s.as_str()),
                _ => None,
            })
            .collect();
        set.into_iter().map(str::to_owned).collect()
    }
}

/// Named columns of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularDataset {
    name: String,
    columns: Vec<Column>,
}

impl TabularDataset {
    pub fn new(name: impl Into<String>, columns: Vec<Column>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::Dataset("dataset name is empty".into()));
        }
        if columns.len() < 2 {
            return Err(Error::Dataset(format!(
                "need at least 2 columns, found {}",
                columns.len()
            )));
        }
        let rows = columns[0].values.len();
        if rows == 0 {
            return Err(Error::Dataset("empty dataset: no data rows".into()));
        }
        let mut seen = HashSet::new();
        for col in &columns {
            if col.values.len() != rows {
                return Err(Error::Dataset(format!(
                    "column {} has {} rows, expected {}",
                    col.name,
                    col.values.len(),
                    rows
                )));
            }
            if !seen.insert(col.name.as_str()) {
                return Err(Error::Dataset(format!("duplicate column name {}", col.name)));
            }
        }
        Ok(TabularDataset { name, columns })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.columns[0].values.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.column(name).is_some()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::Dataset("dataset name is empty".into()));
        }
        self.name = name;
        Ok(self)
    }

    /// Keep only the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let columns = self
            .columns
            .iter()
            .map(|c| Column::new(c.name.clone(), rows.iter().map(|&r| c.values[r].clone()).collect()))
            .collect();
        TabularDataset::new(self.name.clone(), columns)
    }

    /// Replace (or append) a column by name.
    pub fn replace_column(&self, column: Column) -> Result<Self> {
        let mut columns = self.columns.clone();
        match columns.iter_mut().find(|c| c.name == column.name) {
            Some(slot) => *slot = column,
            None => columns.push(column),
        }
        TabularDataset::new(self.name.clone(), columns)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnDescription {
    pub name: String,
    pub description: String,
}

/// Contents of `info.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub dataset_name: String,
    pub question: String,
    #[serde(rename = "columns", default)]
    pub column_descriptions: Vec<ColumnDescription>,
    #[serde(default)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl DatasetMetadata {
    pub fn new(dataset_name: impl Into<String>, question: impl Into<String>) -> Self {
        DatasetMetadata {
            dataset_name: dataset_name.into(),
            question: question.into(),
            column_descriptions: Vec::new(),
            extra: serde_json::Map::new(),
        }
    }

    pub fn describe(mut self, name: impl Into<String>, description: impl Into<String>) -> Self {
        self.column_descriptions.push(ColumnDescription {
            name: name.into(),
            description: description.into(),
        });
        self
    }

    /// Check the metadata against the dataset it describes.
    pub fn validate_against(&self, dataset: &TabularDataset) -> Result<()> {
        if self.question.trim().is_empty() {
            return Err(Error::Dataset("metadata question is empty".into()));
        }
        for d in &self.column_descriptions {
            if !dataset.has_column(&d.name) {
                return Err(Error::UnknownMetadataColumn(d.name.clone()));
            }
        }
        Ok(())
    }

    pub fn to_json_pretty(&self) -> String {
        // serializing a struct of strings and JSON values cannot fail
        serde_json::to_string_pretty(self).expect("metadata serializes")
    }
}

fn parse_numeric(field: &str) -> Option<f64> {
    let v: f64 = field.trim().parse().ok()?;
    v.is_finite().then_some(v)
}

/// Read a CSV file with a header row. Column types are inferred per column:
/// numeric when every non-empty field parses as a finite number, else
/// categorical. Empty fields are missing.
pub fn read_csv(path: &Path) -> Result<TabularDataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset")
        .to_owned();
    parse_csv(&name, &text)
}

pub fn parse_csv(name: &str, text: &str) -> Result<TabularDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::Csv("missing header row".into()));
    }
    let mut raw: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        for (col, field) in raw.iter_mut().zip(record.iter()) {
            col.push(field.to_owned());
        }
    }
    let columns = headers
        .into_iter()
        .zip(raw)
        .map(|(name, fields)| {
            let numeric = fields
                .iter()
                .all(|f| f.is_empty() || parse_numeric(f).is_some());
            let values = fields
                .into_iter()
                .map(|f| {
                    if f.is_empty() {
                        Cell::Missing
                    } else if numeric {
                        Cell::Numeric(parse_numeric(&f).expect("checked above"))
                    } else {
                        Cell::Text(f)
                    }
                })
                .collect();
            Column::new(name, values)
        })
        .collect();
    TabularDataset::new(name, columns)
}

pub fn read_metadata(path: &Path) -> Result<DatasetMetadata> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
}

/// Load a dataset and its metadata, validating one against the other.
pub fn load_dataset(csv_path: &Path, metadata_path: &Path) -> Result<(TabularDataset, DatasetMetadata)> {
    let dataset = read_csv(csv_path)?;
    let metadata = read_metadata(metadata_path)?;
    metadata.validate_against(&dataset)?;
    Ok((dataset, metadata))
}

pub fn csv_string(dataset: &TabularDataset) -> Result<String> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer
        .write_record(dataset.columns.iter().map(|c| c.name.as_str()))
        .map_err(|e| Error::Csv(e.to_string()))?;
    for row in 0..dataset.n_rows() {
        writer
            .write_record(dataset.columns.iter().map(|c| c.values[row].to_field()))
            .map_err(|e| Error::Csv(e.to_string()))?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Paths produced by [`write_dataset`].
#[derive(Debug, Clone)]
pub struct WrittenDataset {
    pub csv: PathBuf,
    pub metadata: PathBuf,
}

/// Write `<name>.csv` and `info.json` into `dir`.
pub fn write_dataset(dataset: &TabularDataset, metadata: &DatasetMetadata, dir: &Path) -> Result<WrittenDataset> {
    // re-check in case the dataset was assembled through a path that skipped validation
    TabularDataset::new(dataset.name.clone(), dataset.columns.clone())?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv_path = dir.join(format!("{}.csv", dataset.name));
    fs::write(&csv_path, csv_string(dataset)?).map_err(|e| Error::io(&csv_path, e))?;
    let meta_path = dir.join("info.json");
    fs::write(&meta_path, metadata.to_json_pretty() + "\n").map_err(|e| Error::io(&meta_path, e))?;
    Ok(WrittenDataset {
        csv: csv_path,
        metadata: meta_path,
    })
}

/// Outcome vector and design matrix (intercept first), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub outcome: Vec<f64>,
    design: Vec<f64>,
    n_cols: usize,
    pub encoded_names: Vec<String>,
    /// Source-row indices that survived listwise deletion, in order.
    pub used_rows: Vec<usize>,
    /// Encoded columns dropped because they were constant.
    pub dropped_constant: Vec<String>,
    /// For a binary categorical outcome, the (level mapped to 0, level mapped to 1).
    pub outcome_levels: Option<(String, String)>,
}

impl DesignMatrix {
    /// Build from row-major data. The first column must be the intercept.
    pub fn from_rows(outcome: Vec<f64>, rows: Vec<Vec<f64>>, encoded_names: Vec<String>) -> Result<Self> {
        let n_cols = encoded_names.len();
        if rows.len() != outcome.len() {
            return Err(Error::InvalidArgument("design rows must match outcome length".into()));
        }
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::InvalidArgument("ragged design rows".into()));
        }
        if rows.iter().any(|r| r[0] != 1.0) {
            return Err(Error::InvalidArgument("first design column must be the intercept".into()));
        }
        let used_rows = (0..outcome.len()).collect();
        Ok(DesignMatrix {
            outcome,
            design: rows.into_iter().flatten().collect(),
            n_cols,
            encoded_names,
            used_rows,
            dropped_constant: Vec::new(),
            outcome_levels: None,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.outcome.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.design[row * self.n_cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.design[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|r| self.get(r, col)).collect()
    }

    /// Same design with a different outcome vector.
    pub fn with_outcome(&self, outcome: Vec<f64>) -> Result<Self> {
        if outcome.len() != self.n_rows() {
            return Err(Error::InvalidArgument("outcome length must match design rows".into()));
        }
        Ok(DesignMatrix {
            outcome,
            ..self.clone()
        })
    }
}

/// Encode `dependent ~ independents` with drop-first one-hot encoding of
/// categorical predictors (reference level = lexicographically smallest) and a
/// leading intercept. Rows missing any used column are dropped.
pub fn one_hot_encode(dataset: &TabularDataset, dependent: &str, independents: &[&str]) -> Result<DesignMatrix> {
    if independents.is_empty() {
        return Err(Error::InvalidArgument("at least one independent column required".into()));
    }
    let dep = dataset
        .column(dependent)
        .ok_or_else(|| Error::UnknownColumn(dependent.to_owned()))?;
    let indeps: Vec<&Column> = independents
        .iter()
        .map(|n| dataset.column(n).ok_or_else(|| Error::UnknownColumn((*n).to_owned())))
        .collect::<Result<_>>()?;

    let used_rows: Vec<usize> = (0..dataset.n_rows())
        .filter(|&r| !dep.values[r].is_missing() && indeps.iter().all(|c| !c.values[r].is_missing()))
        .collect();

    let mut outcome_levels = None;
    let outcome: Vec<f64> = match dep.kind() {
        ColumnKind::Numeric => used_rows
            .iter()
            .map(|&r| dep.values[r].as_f64().expect("numeric column"))
            .collect(),
        ColumnKind::Categorical => {
            let levels = dep.levels();
            if levels.len() != 2 {
                return Err(Error::DependentNotEncodable(dependent.to_owned()));
            }
            let one = levels[1].clone();
            outcome_levels = Some((levels[0].clone(), levels[1].clone()));
            used_rows
                .iter()
                .map(|&r| match &dep.values[r] {
                    Cell::Text(s) if *s == one => 1.0,
                    _ => 0.0,
                })
                .collect()
        }
    };

    // column-major encoded predictors
    let mut names = vec!["(Intercept)".to_owned()];
    let mut cols: Vec<Vec<f64>> = vec![vec![1.0; used_rows.len()]];
    for col in &indeps {
        match col.kind() {
            ColumnKind::Numeric => {
                names.push(col.name.clone());
                cols.push(used_rows.iter().map(|&r| col.values[r].as_f64().unwrap()).collect());
            }
            ColumnKind::Categorical => {
                let levels: BTreeSet<&str> = used_rows
                    .iter()
                    .filter_map(|&r| match &col.values[r] {
                        Cell::Text(s) => Some(s.as_str()),
                        _ => None,
                    })
                    .collect();
                for level in levels.into_iter().skip(1) {
                    names.push(format!("{}={}", col.name, level));
                    cols.push(
                        used_rows
                            .iter()
                            .map(|&r| match &col.values[r] {
                                Cell::Text(s) if s == level => 1.0,
                                _ => 0.0,
                            })
                            .collect(),
                    );
                }
            }
        }
    }

    let mut dropped_constant = Vec::new();
    let mut kept_names = vec![names[0].clone()];
    let mut kept_cols = vec![cols[0].clone()];
    for (name, col) in names.into_iter().zip(cols).skip(1) {
        let constant = col.windows(2).all(|w| w[0] == w[1]);
        if constant {
            dropped_constant.push(name);
        } else {
            kept_names.push(name);
            kept_cols.push(col);
        }
    }

    let need = 5.max(kept_cols.len() + 1);
    if used_rows.len() < need {
        return Err(Error::TooFewRows {
            have: used_rows.len(),
            need,
        });
    }

    let n_cols = kept_cols.len();
    let mut design = Vec::with_capacity(used_rows.len() * n_cols);
    for r in 0..used_rows.len() {
        design.extend(kept_cols.iter().map(|c| c[r]));
    }
    Ok(DesignMatrix {
        outcome,
        design,
        n_cols,
        encoded_names: kept_names,
        used_rows,
        dropped_constant,
        outcome_levels,
    })
}
