use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Declared type of a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Numeric,
    Categorical,
}

impl FromStr for ColumnType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "numeric" | "num" | "real" => Ok(ColumnType::Numeric),
            "categorical" | "cat" | "factor" => Ok(ColumnType::Categorical),
            other => Err(Error::Config(format!("unknown column type '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ColumnKind {
    Numeric,
    /// Values are level codes `0..levels.len()` stored as `f64`.
    Categorical { levels: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    pub values: Vec<f64>,
}

impl Column {
    pub fn numeric(name: impl Into<String>, values: Vec<f64>) -> Self {
        Column {
            name: name.into(),
            kind: ColumnKind::Numeric,
            values,
        }
    }

    /// Categorical column from level codes.
    pub fn categorical(name: impl Into<String>, levels: Vec<String>, codes: &[usize]) -> Self {
        Column {
            name: name.into(),
            kind: ColumnKind::Categorical { levels },
            values: codes.iter().map(|&c| c as f64).collect(),
        }
    }

    /// Number of levels for a categorical column.
    pub fn n_levels(&self) -> Option<usize> {
        match &self.kind {
            ColumnKind::Numeric => None,
            ColumnKind::Categorical { levels } => Some(levels.len()),
        }
    }

    pub fn column_type(&self) -> ColumnType {
        match self.kind {
            ColumnKind::Numeric => ColumnType::Numeric,
            ColumnKind::Categorical { .. } => ColumnType::Categorical,
        }
    }
}

/// Learning problem implied by the target column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Classification,
    Regression,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Classification => "classification",
            Task::Regression => "regression",
        })
    }
}

/// Typed columns plus a designated target: the learning data `(X, Y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    columns: Vec<Column>,
    target: usize,
    predictors: Vec<usize>,
    n: usize,
}

impl Dataset {
    pub fn new(columns: Vec<Column>, target: &str) -> Result<Self> {
        let target_idx = columns
            .iter()
            .position(|c| c.name == target)
            .ok_or_else(|| Error::Data(format!("target column '{target}' not found")))?;
        let n = columns[target_idx].values.len();

        let mut seen = BTreeSet::new();
        for c in &columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Data(format!("duplicate column name '{}'", c.name)));
            }
            if c.values.len() != n {
                return Err(Error::Data(format!(
                    "column '{}' has {} rows, expected {n}",
                    c.name,
                    c.values.len()
                )));
            }
            match &c.kind {
                ColumnKind::Numeric => {
                    if let Some(v) = c.values.iter().find(|v| !v.is_finite()) {
                        return Err(Error::Data(format!("column '{}' contains {v}", c.name)));
                    }
                }
                ColumnKind::Categorical { levels } => {
                    let bad = c
                        .values
                        .iter()
                        .find(|&&v| v < 0.0 || v.fract() != 0.0 || v as usize >= levels.len());
                    if let Some(v) = bad {
                        return Err(Error::Data(format!(
                            "column '{}' has invalid level code {v}",
                            c.name
                        )));
                    }
                }
            }
        }

        let predictors = (0..columns.len()).filter(|&i| i != target_idx).collect();
        Ok(Dataset {
            columns,
            target: target_idx,
            predictors,
            n,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_predictors(&self) -> usize {
        self.predictors.len()
    }

    /// The `j`-th predictor (columns in file order, target skipped).
    pub fn predictor(&self, j: usize) -> &Column {
        &self.columns[self.predictors[j]]
    }

    pub fn predictor_names(&self) -> Vec<&str> {
        self.predictors
            .iter()
            .map(|&i| self.columns[i].name.as_str())
            .collect()
    }

    pub fn predictor_index(&self, name: &str) -> Option<usize> {
        self.predictors
            .iter()
            .position(|&i| self.columns[i].name == name)
    }

    pub fn target(&self) -> &Column {
        &self.columns[self.target]
    }

    pub fn task(&self) -> Task {
        match self.target().kind {
            ColumnKind::Numeric => Task::Regression,
            ColumnKind::Categorical { .. } => Task::Classification,
        }
    }

    /// Number of target classes; 0 for regression.
    pub fn n_classes(&self) -> usize {
        self.target().n_levels().unwrap_or(0)
    }

    /// A copy with predictor `j` reordered so that row `i` takes the value of
    /// row `perm[i]`.
    pub fn with_predictor_permuted(&self, j: usize, perm: &[usize]) -> Result<Dataset> {
        if perm.len() != self.n {
            return Err(Error::Usage(format!(
                "permutation has length {}, dataset has {} rows",
                perm.len(),
                self.n
            )));
        }
        let mut out = self.clone();
        let col = self.predictors[j];
        let src = &self.columns[col].values;
        out.columns[col].values = perm.iter().map(|&k| src[k]).collect();
        Ok(out)
    }

    /// A copy whose row `i` is row `order[i]` of `self`.
    pub fn with_rows(&self, order: &[usize]) -> Result<Dataset> {
        if order.iter().any(|&i| i >= self.n) {
            return Err(Error::Usage("row index out of range".into()));
        }
        let mut out = self.clone();
        for (dst, src) in out.columns.iter_mut().zip(&self.columns) {
            dst.values = order.iter().map(|&i| src.values[i]).collect();
        }
        out.n = order.len();
        Ok(out)
    }

    /// Read a CSV file with a header row.
    pub fn from_csv_path(
        path: &Path,
        target: &str,
        schema: Option<&Schema>,
    ) -> Result<(Dataset, IngestSummary)> {
        let file = fs::File::open(path)
            .map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
        Self::from_csv_reader(file, target, schema)
    }

    /// Parse CSV with a header row. Column types are inferred (numeric if
    /// every present cell parses as a finite number, categorical otherwise)
    /// unless `schema` declares them. Rows with a missing cell in any column
    /// are dropped.
    pub fn from_csv_reader<R: Read>(
        reader: R,
        target: &str,
        schema: Option<&Schema>,
    ) -> Result<(Dataset, IngestSummary)> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if !headers.iter().any(|h| h == target) {
            return Err(Error::Data(format!("target column '{target}' not found in header")));
        }
        if let Some(schema) = schema {
            if let Some(name) = schema.types.keys().find(|k| !headers.contains(k)) {
                return Err(Error::Config(format!("schema names unknown column '{name}'")));
            }
        }

        let mut rows_read = 0;
        let mut complete: Vec<Vec<String>> = Vec::new();
        for record in rdr.records() {
            let record = record?;
            rows_read += 1;
            if record.len() != headers.len() {
                return Err(Error::Data(format!(
                    "row {rows_read} has {} fields, header has {}",
                    record.len(),
                    headers.len()
                )));
            }
            if record.iter().any(is_missing) {
                continue;
            }
            complete.push(record.iter().map(str::to_string).collect());
        }
        if complete.is_empty() {
            return Err(Error::Data("no complete rows".into()));
        }

        let mut columns = Vec::with_capacity(headers.len());
        for (ci, name) in headers.iter().enumerate() {
            let cells: Vec<&str> = complete.iter().map(|r| r[ci].as_str()).collect();
            let declared = schema.and_then(|s| s.types.get(name).copied());
            let parsed: Option<Vec<f64>> = cells
                .iter()
                .map(|c| c.parse::<f64>().ok().filter(|v| v.is_finite()))
                .collect();
            let column = match (declared, parsed) {
                (Some(ColumnType::Numeric), None) => {
                    return Err(Error::Data(format!(
                        "column '{name}' is declared numeric but has non-numeric values"
                    )));
                }
                (Some(ColumnType::Numeric) | None, Some(values)) => Column::numeric(name, values),
                (Some(ColumnType::Categorical), _) | (None, None) => {
                    let levels: Vec<String> = cells
                        .iter()
                        .copied()
                        .collect::<BTreeSet<_>>()
                        .into_iter()
                        .map(str::to_string)
                        .collect();
                    let index: HashMap<&str, usize> =
                        levels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
                    let codes: Vec<usize> = cells.iter().map(|c| index[c]).collect();
                    Column::categorical(name, levels.clone(), &codes)
                }
            };
            columns.push(column);
        }

        let dataset = Dataset::new(columns, target)?;
        let summary = IngestSummary {
            rows_read,
            rows_dropped: rows_read - dataset.n_rows(),
            column_types: dataset
                .columns
                .iter()
                .map(|c| (c.name.clone(), c.column_type()))
                .collect(),
        };
        if summary.rows_dropped > 0 {
            log::info!(
                "dropped {} of {} rows with missing values",
                summary.rows_dropped,
                rows_read
            );
        }
        Ok((dataset, summary))
    }
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "NA" | "N/A" | "NaN" | "nan" | "?")
}

/// What happened during CSV ingestion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestSummary {
    pub rows_read: usize,
    pub rows_dropped: usize,
    pub column_types: Vec<(String, ColumnType)>,
}

/// Column type overrides, one `name:type` pair per line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Schema {
    pub types: HashMap<String, ColumnType>,
}

impl Schema {
    pub fn parse(text: &str) -> Result<Self> {
        let mut types = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, ty) = line.rsplit_once(':').ok_or_else(|| {
                Error::Config(format!("schema line {}: expected name:type", lineno + 1))
            })?;
            types.insert(name.trim().to_string(), ty.parse()?);
        }
        Ok(Schema { types })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read schema {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}
