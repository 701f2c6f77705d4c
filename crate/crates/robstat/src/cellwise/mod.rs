//! Cellwise outliers: DetectDeviatingCells with a cellmap, and the cellwise MCD.
//!
//! Everything here works in `f64`; missing cells are carried as NaN.

mod cellmcd;
mod ddc;
mod plot;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RobError};

pub use cellmcd::{fit_cellmcd, CellMcdFit, CellMcdOptions};
pub use ddc::{ddc_impute, ddc_predict, fit_ddc, DdcModel, DdcParams};
pub use plot::{cellmcd_plot_data, CellMcdPlot, CellMcdPlotType, Ellipse};

/// Cell-level diagnostics for a block of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFlags {
    pub row_ids: Vec<usize>,
    pub columns: Vec<String>,
    /// Input values, NaN where missing.
    pub values: Vec<Vec<f64>>,
    pub flags: Vec<Vec<bool>>,
    /// NaN where the cell is missing.
    pub std_residuals: Vec<Vec<f64>>,
    /// Predicted cell values in the original units.
    pub predictions: Vec<Vec<f64>>,
    pub row_scores: Vec<f64>,
    pub row_flags: Vec<bool>,
    pub cutoff: f64,
}

impl CellFlags {
    pub fn n_flagged(&self) -> usize {
        self.flags.iter().flatten().filter(|&&f| f).count()
    }

    pub fn is_missing(&self, i: usize, j: usize) -> bool {
        self.values[i][j].is_nan()
    }

    /// One record per cell, row-major.
    pub fn records(&self) -> Vec<CellRecord> {
        let mut out = Vec::with_capacity(self.row_ids.len() * self.columns.len());
        for (i, &id) in self.row_ids.iter().enumerate() {
            for (j, name) in self.columns.iter().enumerate() {
                let r = self.std_residuals[i][j];
                out.push(CellRecord {
                    row_id: id,
                    column: name.clone(),
                    value: finite(self.values[i][j]),
                    prediction: finite(self.predictions[i][j]),
                    std_residual: finite(r),
                    flag: self.flags[i][j],
                    color_bin: CellColor::classify(self.flags[i][j], r, self.is_missing(i, j), self.cutoff).code(),
                });
            }
        }
        out
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Flat per-cell row for CSV export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub row_id: usize,
    pub column: String,
    pub value: Option<f64>,
    pub prediction: Option<f64>,
    pub std_residual: Option<f64>,
    pub flag: bool,
    pub color_bin: String,
}

/// Number of graded intensity bins per sign.
pub const CELLMAP_BINS: u8 = 5;
/// |r| at which the color saturates.
pub const CELLMAP_SATURATION: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellColor {
    Inlier,
    Missing,
    Pos(u8),
    Neg(u8),
}

impl CellColor {
    pub fn classify(flag: bool, r: f64, missing: bool, cutoff: f64) -> Self {
        if missing {
            return CellColor::Missing;
        }
        if !flag {
            return CellColor::Inlier;
        }
        let span = (CELLMAP_SATURATION - cutoff).max(1e-12);
        let t = ((r.abs() - cutoff) / span).clamp(0.0, 1.0);
        let k = ((t * CELLMAP_BINS as f64).ceil() as u8).clamp(1, CELLMAP_BINS);
        if r > 0.0 {
            CellColor::Pos(k)
        } else {
            CellColor::Neg(k)
        }
    }

    pub fn code(&self) -> String {
        match self {
            CellColor::Inlier => "inlier".into(),
            CellColor::Missing => "missing".into(),
            CellColor::Pos(k) => format!("pos_{k}"),
            CellColor::Neg(k) => format!("neg_{k}"),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "inlier" => Some(CellColor::Inlier),
            "missing" => Some(CellColor::Missing),
            _ => {
                let (sign, k) = s.split_once('_')?;
                let k: u8 = k.parse().ok()?;
                if !(1..=CELLMAP_BINS).contains(&k) {
                    return None;
                }
                match sign {
                    "pos" => Some(CellColor::Pos(k)),
                    "neg" => Some(CellColor::Neg(k)),
                    _ => None,
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellmapGrid {
    pub rows: Vec<usize>,
    pub columns: Vec<String>,
    /// rows x columns.
    pub cells: Vec<Vec<CellColor>>,
}

/// Color grid over an optional subset of row ids and column names.
pub fn cellmap_data(flags: &CellFlags, rows: Option<&[usize]>, columns: Option<&[String]>) -> Result<CellmapGrid> {
    let row_pos: Vec<usize> = match rows {
        None => (0..flags.row_ids.len()).collect(),
        Some(ids) => ids
            .iter()
            .map(|id| {
                flags
                    .row_ids
                    .iter()
                    .position(|r| r == id)
                    .ok_or_else(|| RobError::InvalidArgument(format!("unknown row id {id}")))
            })
            .collect::<Result<_>>()?,
    };
    let col_pos: Vec<usize> = match columns {
        None => (0..flags.columns.len()).collect(),
        Some(names) => names
            .iter()
            .map(|c| {
                flags
                    .columns
                    .iter()
                    .position(|n| n == c)
                    .ok_or_else(|| RobError::InvalidArgument(format!("unknown column {c:?}")))
            })
            .collect::<Result<_>>()?,
    };
    let cells = row_pos
        .iter()
        .map(|&i| {
            col_pos
                .iter()
                .map(|&j| CellColor::classify(flags.flags[i][j], flags.std_residuals[i][j], flags.is_missing(i, j), flags.cutoff))
                .collect()
        })
        .collect();
    Ok(CellmapGrid {
        rows: row_pos.iter().map(|&i| flags.row_ids[i]).collect(),
        columns: col_pos.iter().map(|&j| flags.columns[j].clone()).collect(),
        cells,
    })
}
