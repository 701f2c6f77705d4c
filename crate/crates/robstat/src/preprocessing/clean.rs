use std::collections::HashSet;

use robstat_data::{Column, Frame};
use serde::{Deserialize, Serialize};

use crate::error::{Result, RobError};
use crate::kernel::mad;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CleanThresholds {
    pub frac_na_row: f64,
    pub frac_na_col: f64,
    pub min_unique: usize,
    pub scale_floor: f64,
}

impl Default for CleanThresholds {
    fn default() -> Self {
        CleanThresholds { frac_na_row: 0.5, frac_na_col: 0.5, min_unique: 3, scale_floor: 1e-12 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedColumns {
    pub non_numeric_cols: Vec<String>,
    pub cols_rownumbers: Vec<String>,
    pub cols_discrete: Vec<String>,
    pub cols_bad_scale: Vec<String>,
    pub cols_missings: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedRows {
    pub rows_missings: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanReport {
    pub dropped_columns: DroppedColumns,
    pub dropped_rows: DroppedRows,
}

impl CleanReport {
    pub fn is_empty(&self) -> bool {
        let c = &self.dropped_columns;
        c.non_numeric_cols.is_empty()
            && c.cols_rownumbers.is_empty()
            && c.cols_discrete.is_empty()
            && c.cols_bad_scale.is_empty()
            && c.cols_missings.is_empty()
            && self.dropped_rows.rows_missings.is_empty()
    }
}

fn finite(v: &Option<f64>) -> Option<f64> {
    v.filter(|x| x.is_finite())
}

/// Drops, in order: text columns, case-number columns, discrete columns
/// (fewer than `min_unique` distinct values), columns whose consistent MAD is
/// below `scale_floor`, then columns and rows whose fraction of missing cells
/// reaches the thresholds. Non-finite numbers count as missing.
pub fn clean_dataset(frame: &Frame, th: &CleanThresholds) -> Result<(Frame, CleanReport)> {
    let n = frame.n_rows();
    if n == 0 || frame.n_cols() == 0 {
        return Err(RobError::EmptySample);
    }
    let mut report = CleanReport::default();
    let mut kept: Vec<(String, Vec<Option<f64>>)> = Vec::new();
    for (name, col) in frame.names().iter().zip(frame.columns()) {
        let values = match col {
            Column::Text(_) => {
                report.dropped_columns.non_numeric_cols.push(name.clone());
                continue;
            }
            Column::Numeric(v) => v.iter().map(finite).collect::<Vec<_>>(),
        };
        if values.iter().enumerate().all(|(i, v)| *v == Some(i as f64)) {
            report.dropped_columns.cols_rownumbers.push(name.clone());
            continue;
        }
        let present: Vec<f64> = values.iter().flatten().copied().collect();
        let distinct: HashSet<u64> = present.iter().map(|v| (v + 0.0).to_bits()).collect();
        if distinct.len() < th.min_unique {
            report.dropped_columns.cols_discrete.push(name.clone());
            continue;
        }
        if mad(&present, true)? < th.scale_floor {
            report.dropped_columns.cols_bad_scale.push(name.clone());
            continue;
        }
        kept.push((name.clone(), values));
    }
    kept.retain(|(name, v)| {
        let frac = v.iter().filter(|x| x.is_none()).count() as f64 / n as f64;
        if frac >= th.frac_na_col {
            report.dropped_columns.cols_missings.push(name.clone());
            false
        } else {
            true
        }
    });
    if kept.is_empty() {
        return Err(RobError::NoAnalyzableColumns);
    }
    let p = kept.len() as f64;
    let mut keep_rows = Vec::with_capacity(n);
    for i in 0..n {
        let miss = kept.iter().filter(|(_, v)| v[i].is_none()).count() as f64;
        if miss / p >= th.frac_na_row {
            report.dropped_rows.rows_missings.push(frame.row_ids()[i]);
        } else {
            keep_rows.push(i);
        }
    }
    if keep_rows.is_empty() {
        return Err(RobError::NoAnalyzableColumns);
    }
    let names: Vec<String> = kept.iter().map(|(n, _)| n.clone()).collect();
    let columns: Vec<Column> = kept
        .into_iter()
        .map(|(_, v)| Column::Numeric(keep_rows.iter().map(|&i| v[i]).collect()))
        .collect();
    let row_ids = keep_rows.iter().map(|&i| frame.row_ids()[i]).collect();
    Ok((Frame::with_row_ids(names, columns, row_ids)?, report))
}
