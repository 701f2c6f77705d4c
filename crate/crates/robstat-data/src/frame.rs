use std::collections::HashSet;

use crate::{DataError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Text,
}

/// A single column. `None` marks a missing cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(Vec<Option<f64>>),
    Text(Vec<Option<String>>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            Column::Numeric(_) => ColumnKind::Numeric,
            Column::Text(_) => ColumnKind::Text,
        }
    }

    pub fn is_missing(&self, i: usize) -> bool {
        match self {
            Column::Numeric(v) => v[i].is_none(),
            Column::Text(v) => v[i].is_none(),
        }
    }

    pub fn missing_mask(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.is_missing(i)).collect()
    }

    fn take(&self, positions: &[usize]) -> Column {
        match self {
            Column::Numeric(v) => Column::Numeric(positions.iter().map(|&i| v[i]).collect()),
            Column::Text(v) => Column::Text(positions.iter().map(|&i| v[i].clone()).collect()),
        }
    }
}

/// Named columns over a shared set of stable row identifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    names: Vec<String>,
    columns: Vec<Column>,
    row_ids: Vec<usize>,
}

impl Frame {
    pub fn new(names: Vec<String>, columns: Vec<Column>) -> Result<Self> {
        let n = columns.first().map(Column::len).unwrap_or(0);
        Self::with_row_ids(names, columns, (0..n).collect())
    }

    pub fn with_row_ids(names: Vec<String>, columns: Vec<Column>, row_ids: Vec<usize>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(DataError::LengthMismatch {
                name: "<header>".into(),
                expected: names.len(),
                found: columns.len(),
            });
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(DataError::DuplicateColumn(name.clone()));
            }
        }
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != row_ids.len() {
                return Err(DataError::LengthMismatch {
                    name: name.clone(),
                    expected: row_ids.len(),
                    found: col.len(),
                });
            }
        }
        let mut ids = HashSet::new();
        for &id in &row_ids {
            if !ids.insert(id) {
                return Err(DataError::DuplicateRowId(id));
            }
        }
        Ok(Frame { names, columns, row_ids })
    }

    /// Builds an all-numeric frame from row-major values; NaN becomes missing.
    pub fn from_rows(names: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let p = names.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != p {
                return Err(DataError::Ragged { row: i, expected: p, found: r.len() });
            }
        }
        let columns = (0..p)
            .map(|j| Column::Numeric(rows.iter().map(|r| if r[j].is_nan() { None } else { Some(r[j]) }).collect()))
            .collect();
        let row_ids = (0..rows.len()).collect();
        Frame::with_row_ids(names, columns, row_ids)
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| DataError::UnknownColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        Ok(&self.columns[self.column_index(name)?])
    }

    pub fn kind(&self, j: usize) -> ColumnKind {
        self.columns[j].kind()
    }

    pub fn numeric(&self, name: &str) -> Result<&[Option<f64>]> {
        match self.column(name)? {
            Column::Numeric(v) => Ok(v),
            Column::Text(_) => Err(DataError::NotNumeric(name.to_string())),
        }
    }

    /// Numeric column as plain values with NaN standing in for missing cells.
    pub fn numeric_values(&self, name: &str) -> Result<Vec<f64>> {
        Ok(self.numeric(name)?.iter().map(|v| v.unwrap_or(f64::NAN)).collect())
    }

    pub fn text(&self, name: &str) -> Result<&[Option<String>]> {
        match self.column(name)? {
            Column::Text(v) => Ok(v),
            Column::Numeric(_) => Err(DataError::NotNumeric(name.to_string())),
        }
    }

    pub fn numeric_names(&self) -> Vec<String> {
        self.names
            .iter()
            .zip(&self.columns)
            .filter(|(_, c)| c.kind() == ColumnKind::Numeric)
            .map(|(n, _)| n.clone())
            .collect()
    }

    /// Row-major numeric matrix of all numeric columns (NaN for missing).
    pub fn numeric_rows(&self) -> Vec<Vec<f64>> {
        let cols: Vec<&Vec<Option<f64>>> = self
            .columns
            .iter()
            .filter_map(|c| match c {
                Column::Numeric(v) => Some(v),
                Column::Text(_) => None,
            })
            .collect();
        (0..self.n_rows())
            .map(|i| cols.iter().map(|c| c[i].unwrap_or(f64::NAN)).collect())
            .collect()
    }

    pub fn has_missing(&self) -> bool {
        self.columns.iter().any(|c| (0..c.len()).any(|i| c.is_missing(i)))
    }

    pub fn position_of_row(&self, row_id: usize) -> Result<usize> {
        self.row_ids
            .iter()
            .position(|&r| r == row_id)
            .ok_or(DataError::UnknownRow(row_id))
    }

    /// Keeps rows at the given positions, preserving their identifiers.
    pub fn take_rows(&self, positions: &[usize]) -> Frame {
        Frame {
            names: self.names.clone(),
            columns: self.columns.iter().map(|c| c.take(positions)).collect(),
            row_ids: positions.iter().map(|&i| self.row_ids[i]).collect(),
        }
    }

    pub fn drop_rows_by_id(&self, ids: &[usize]) -> Frame {
        let drop: HashSet<usize> = ids.iter().copied().collect();
        let keep: Vec<usize> = (0..self.n_rows()).filter(|&i| !drop.contains(&self.row_ids[i])).collect();
        self.take_rows(&keep)
    }

    pub fn select(&self, names: &[&str]) -> Result<Frame> {
        let mut out_names = Vec::with_capacity(names.len());
        let mut out_cols = Vec::with_capacity(names.len());
        for &name in names {
            let j = self.column_index(name)?;
            out_names.push(self.names[j].clone());
            out_cols.push(self.columns[j].clone());
        }
        Frame::with_row_ids(out_names, out_cols, self.row_ids.clone())
    }

    pub fn drop_columns(&self, names: &[&str]) -> Result<Frame> {
        for &name in names {
            self.column_index(name)?;
        }
        let keep: Vec<&str> = self
            .names
            .iter()
            .map(String::as_str)
            .filter(|n| !names.contains(n))
            .collect();
        self.select(&keep)
    }

    /// Drops every row that has a missing cell in any column.
    pub fn drop_missing_rows(&self) -> Frame {
        let keep: Vec<usize> = (0..self.n_rows())
            .filter(|&i| !self.columns.iter().any(|c| c.is_missing(i)))
            .collect();
        self.take_rows(&keep)
    }

    pub fn push_column(&mut self, name: &str, column: Column) -> Result<()> {
        if self.names.iter().any(|n| n == name) {
            return Err(DataError::DuplicateColumn(name.to_string()));
        }
        if column.len() != self.n_rows() {
            return Err(DataError::LengthMismatch {
                name: name.to_string(),
                expected: self.n_rows(),
                found: column.len(),
            });
        }
        self.names.push(name.to_string());
        self.columns.push(column);
        Ok(())
    }

    pub fn replace_column(&mut self, name: &str, column: Column) -> Result<()> {
        let j = self.column_index(name)?;
        if column.len() != self.n_rows() {
            return Err(DataError::LengthMismatch {
                name: name.to_string(),
                expected: self.n_rows(),
                found: column.len(),
            });
        }
        self.columns[j] = column;
        Ok(())
    }
}
