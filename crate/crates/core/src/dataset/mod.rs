//! Tabular fire-test data: schema, immutable column store, CSV ingestion,
//! descriptive statistics, treatment binarization and a synthetic generator.

mod report;
mod stats;
mod synth;

pub use report::{fmt2, summary_report, ColumnSummary, SummaryReport, SUMMARY_ROWS};
pub use stats::{
    binarize_at_mean, correlation_matrix, pearson, pearson_correlation, quantile_discretize,
    summarize, summarize_values, BinaryTreatment, CorrelationMatrix, SummaryStats,
};
pub use synth::{synthesize_fire_dataset, FireDgp, MarginalSpec, FIRE_DGP};

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The seven input variables of the fire schema, in canonical order.
pub const FIRE_INPUTS: [&str; 7] = ["W", "r", "L", "fc", "K", "C", "P"];

/// Outcome column of the fire schema (fire resistance, minutes).
pub const FIRE_OUTCOME: &str = "FR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Input,
    Outcome,
    Auxiliary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
    pub role: Role,
}

impl Column {
    pub fn new(name: impl Into<String>, unit: impl Into<String>, role: Role) -> Self {
        Column {
            name: name.into(),
            unit: unit.into(),
            role,
        }
    }
}

/// Ordered list of uniquely named columns with at most one outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    columns: Vec<Column>,
}

impl Schema {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let mut seen = HashSet::new();
        for c in &columns {
            if c.name.is_empty() {
                return Err(Error::Schema("empty column name".into()));
            }
            if !seen.insert(c.name.as_str()) {
                return Err(Error::DuplicateColumn(c.name.clone()));
            }
        }
        let outcomes = columns.iter().filter(|c| c.role == Role::Outcome).count();
        if outcomes > 1 {
            return Err(Error::Schema(format!(
                "expected at most one outcome column, found {outcomes}"
            )));
        }
        Ok(Schema { columns })
    }

    /// The canonical eight-column fire-test schema.
    pub fn fire() -> Self {
        let units = ["mm", "%", "m", "MPa", "-", "mm", "kN"];
        let mut columns: Vec<Column> = FIRE_INPUTS
            .iter()
            .zip(units)
            .map(|(n, u)| Column::new(*n, u, Role::Input))
            .collect();
        columns.push(Column::new(FIRE_OUTCOME, "min", Role::Outcome));
        Schema { columns }
    }

    /// Parse a schema from its JSON form `{"columns":[{"name","unit","role"}]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Schema = serde_json::from_str(text)?;
        Schema::new(raw.columns)
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    pub fn inputs(&self) -> impl Iterator<Item = &str> {
        self.columns
            .iter()
            .filter(|c| c.role == Role::Input)
            .map(|c| c.name.as_str())
    }

    pub fn outcome(&self) -> Option<&str> {
        self.columns
            .iter()
            .find(|c| c.role == Role::Outcome)
            .map(|c| c.name.as_str())
    }
}

/// Immutable column-oriented table of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    schema: Schema,
    columns: Vec<Vec<f64>>,
}

impl Table {
    /// Build a table from one value vector per schema column.
    pub fn from_columns(schema: Schema, columns: Vec<Vec<f64>>) -> Result<Self> {
        if columns.len() != schema.len() {
            return Err(Error::Schema(format!(
                "{} columns supplied for a {}-column schema",
                columns.len(),
                schema.len()
            )));
        }
        let n = columns.first().map_or(0, Vec::len);
        for (col, values) in schema.columns().iter().zip(&columns) {
            if values.len() != n {
                return Err(Error::Schema(format!(
                    "column `{}` has {} values, expected {n}",
                    col.name,
                    values.len()
                )));
            }
            if let Some(row) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonNumeric {
                    row,
                    column: col.name.clone(),
                    value: values[row].to_string(),
                });
            }
        }
        Ok(Table { schema, columns })
    }

    pub fn from_rows(schema: Schema, rows: &[Vec<f64>]) -> Result<Self> {
        let mut columns = vec![Vec::with_capacity(rows.len()); schema.len()];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != schema.len() {
                return Err(Error::Schema(format!(
                    "row {i} has {} values, expected {}",
                    row.len(),
                    schema.len()
                )));
            }
            for (c, v) in columns.iter_mut().zip(row) {
                c.push(*v);
            }
        }
        Table::from_columns(schema, columns)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.schema
            .index_of(name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    /// New table with `values` appended as an extra column.
    pub fn with_column(&self, column: Column, values: Vec<f64>) -> Result<Table> {
        let mut cols = self.schema.columns.clone();
        cols.push(column);
        let schema = Schema::new(cols)?;
        let mut columns = self.columns.clone();
        columns.push(values);
        Table::from_columns(schema, columns)
    }

    /// New table with the named column's values replaced.
    pub fn replace_column(&self, name: &str, values: Vec<f64>) -> Result<Table> {
        let idx = self
            .schema
            .index_of(name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))?;
        if values.len() != self.n_rows() {
            return Err(Error::Schema(format!(
                "replacement for `{name}` has {} values, expected {}",
                values.len(),
                self.n_rows()
            )));
        }
        let mut columns = self.columns.clone();
        columns[idx] = values;
        Table::from_columns(self.schema.clone(), columns)
    }

    /// New table keeping only `rows`, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Table {
        let columns = self
            .columns
            .iter()
            .map(|c| rows.iter().map(|&i| c[i]).collect())
            .collect();
        Table {
            schema: self.schema.clone(),
            columns,
        }
    }

    /// New table keeping only the named columns, in the given order.
    pub fn select_columns(&self, names: &[&str]) -> Result<Table> {
        let mut cols = Vec::with_capacity(names.len());
        let mut values = Vec::with_capacity(names.len());
        for name in names {
            let idx = self
                .schema
                .index_of(name)
                .ok_or_else(|| Error::UnknownColumn(name.to_string()))?;
            cols.push(self.schema.columns[idx].clone());
            values.push(self.columns[idx].clone());
        }
        Table::from_columns(Schema::new(cols)?, values)
    }

    /// Render as CSV: one header row of column names, dot decimals,
    /// shortest round-trip float formatting.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.schema.names().collect::<Vec<_>>().join(","));
        out.push('\n');
        for i in 0..self.n_rows() {
            for (j, c) in self.columns.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", c[i]);
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }
}

/// Load a CSV file whose header names match `schema` in any order.
/// Units and roles come from the schema; rows keep file order.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Table> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, schema).map_err(|e| match e {
        Error::EmptyFile(_) => Error::EmptyFile(path.display().to_string()),
        other => other,
    })
}

pub fn parse_csv(text: &str, schema: &Schema) -> Result<Table> {
    if text.trim().is_empty() {
        return Err(Error::EmptyFile("<input>".into()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();

    let mut positions = Vec::with_capacity(schema.len());
    for col in schema.columns() {
        let pos = header
            .iter()
            .position(|h| *h == col.name)
            .ok_or_else(|| Error::MissingColumn(col.name.clone()))?;
        positions.push(pos);
    }
    let mut seen = HashSet::new();
    for h in &header {
        if !seen.insert(h.as_str()) {
            return Err(Error::DuplicateColumn(h.clone()));
        }
    }

    let mut columns = vec![Vec::new(); schema.len()];
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        for ((col, &pos), values) in schema.columns().iter().zip(&positions).zip(&mut columns) {
            let cell = record.get(pos).unwrap_or("");
            let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                row: row + 1,
                column: col.name.clone(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonNumeric {
                    row: row + 1,
                    column: col.name.clone(),
                    value: cell.to_string(),
                });
            }
            values.push(v);
        }
    }
    if columns.first().is_none_or(Vec::is_empty) {
        return Err(Error::EmptyFile("<input>".into()));
    }
    Table::from_columns(schema.clone(), columns)
}
