use nalgebra::DMatrix;
use robstat_data::{Column, ColumnKind, Frame};
use serde::{Deserialize, Serialize};

use crate::cellwise::CellFlags;
use crate::covariance::wrap_psi;
use crate::error::{Result, RobError};
use crate::kernel::distr::chi2_quantile_f;
use crate::kernel::mad;
use crate::univariate::OneStepM;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DdcParams {
    pub cell_cutoff_prob: f64,
    pub corr_lim: f64,
    pub max_predictors: usize,
}

impl Default for DdcParams {
    fn default() -> Self {
        DdcParams { cell_cutoff_prob: 0.99, corr_lim: 0.5, max_predictors: 10 }
    }
}

/// Frozen DDC parameters plus the diagnostics on the training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DdcModel {
    pub params: DdcParams,
    pub columns: Vec<String>,
    pub location: Vec<f64>,
    pub scale: Vec<f64>,
    /// Wrapped correlations between the standardized columns.
    pub correlation: DMatrix<f64>,
    /// slopes[(j, k)] predicts column j from column k.
    pub slopes: DMatrix<f64>,
    pub predictors: Vec<Vec<usize>>,
    pub residual_scale: Vec<f64>,
    pub cutoff: f64,
    pub flags: CellFlags,
}

fn check_params(p: &DdcParams) -> Result<()> {
    if !(p.cell_cutoff_prob > 0.5 && p.cell_cutoff_prob < 1.0) {
        return Err(RobError::InvalidArgument(format!("cell_cutoff_prob must lie in (0.5, 1), got {}", p.cell_cutoff_prob)));
    }
    if !(0.0..=1.0).contains(&p.corr_lim) {
        return Err(RobError::InvalidArgument(format!("corr_lim must lie in [0, 1], got {}", p.corr_lim)));
    }
    Ok(())
}

fn present(col: &[Option<f64>]) -> Vec<f64> {
    col.iter().flatten().copied().filter(|v| v.is_finite()).collect()
}

fn usable(col: &[Option<f64>]) -> bool {
    let mut v = present(col);
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len() >= 3 && OneStepM::cellwise().fit(&present(col)).map_or(false, |f| f.scale > 0.0)
}

/// n x p matrix of the named numeric columns, NaN where missing.
fn matrix_of(frame: &Frame, columns: &[String]) -> Result<DMatrix<f64>> {
    let mut x = DMatrix::from_element(frame.n_rows(), columns.len(), f64::NAN);
    for (j, name) in columns.iter().enumerate() {
        let col = frame
            .numeric(name)
            .map_err(|_| RobError::SchemaMismatch(format!("numeric column {name:?} not found")))?;
        for (i, v) in col.iter().enumerate() {
            if let Some(v) = v {
                x[(i, j)] = *v;
            }
        }
    }
    Ok(x)
}

/// DetectDeviatingCells on the numeric columns of `frame`. Columns with fewer
/// than three distinct values or zero robust scale are left out.
pub fn fit_ddc(frame: &Frame, params: &DdcParams) -> Result<DdcModel> {
    check_params(params)?;
    let columns: Vec<String> = (0..frame.n_cols())
        .filter(|&j| frame.kind(j) == ColumnKind::Numeric)
        .map(|j| frame.names()[j].clone())
        .filter(|name| frame.numeric(name).map_or(false, usable))
        .collect();
    if columns.len() < 2 {
        return Err(RobError::InvalidArgument(format!("DDC needs at least 2 usable columns, found {}", columns.len())));
    }
    let x = matrix_of(frame, &columns)?;
    fit_ddc_matrix(&x, columns, frame.row_ids().to_vec(), params)
}

pub(crate) fn fit_ddc_matrix(x: &DMatrix<f64>, columns: Vec<String>, row_ids: Vec<usize>, params: &DdcParams) -> Result<DdcModel> {
    check_params(params)?;
    let (_, p) = x.shape();
    let mut location = Vec::with_capacity(p);
    let mut scale = Vec::with_capacity(p);
    for j in 0..p {
        let v: Vec<f64> = x.column(j).iter().copied().filter(|v| v.is_finite()).collect();
        let f = OneStepM::cellwise().fit(&v).map_err(|_| RobError::ZeroRobustScale(columns[j].clone()))?;
        if !(f.scale > 0.0) {
            return Err(RobError::ZeroRobustScale(columns[j].clone()));
        }
        location.push(f.location);
        scale.push(f.scale);
    }
    let z = standardize(x, &location, &scale);
    let psi = z.map(|v| if v.is_finite() { wrap_psi(v, 1.5, 4.0) } else { f64::NAN });

    let mut correlation = DMatrix::identity(p, p);
    let mut slopes = DMatrix::zeros(p, p);
    for j in 0..p {
        for k in (j + 1)..p {
            let (r, b_jk, b_kj) = wrapped_pair(&psi, j, k);
            correlation[(j, k)] = r;
            correlation[(k, j)] = r;
            slopes[(j, k)] = b_jk;
            slopes[(k, j)] = b_kj;
        }
    }
    let predictors = (0..p)
        .map(|j| {
            let mut ks: Vec<usize> = (0..p).filter(|&k| k != j && correlation[(j, k)].abs() >= params.corr_lim).collect();
            ks.sort_by(|&a, &b| correlation[(j, b)].abs().total_cmp(&correlation[(j, a)].abs()).then(a.cmp(&b)));
            ks.truncate(params.max_predictors);
            ks
        })
        .collect();
    let cutoff = chi2_quantile_f(params.cell_cutoff_prob, 1.0).sqrt();
    let mut model = DdcModel {
        params: *params,
        columns,
        location,
        scale,
        correlation,
        slopes,
        predictors,
        residual_scale: vec![1.0; p],
        cutoff,
        flags: CellFlags {
            row_ids: vec![],
            columns: vec![],
            values: vec![],
            flags: vec![],
            std_residuals: vec![],
            predictions: vec![],
            row_scores: vec![],
            row_flags: vec![],
            cutoff,
        },
    };
    let (_, raw, used) = predict_z(&model, &z);
    for j in 0..p {
        let r: Vec<f64> = (0..raw.nrows()).filter(|&i| used[(i, j)]).map(|i| raw[(i, j)]).filter(|v| v.is_finite()).collect();
        if r.len() < 3 {
            continue;
        }
        let s = OneStepM::cellwise()
            .fit(&r)
            .map(|f| f.scale)
            .ok()
            .filter(|s| *s > 0.0)
            .or_else(|| mad(&r, true).ok())
            .unwrap_or(0.0);
        model.residual_scale[j] = s.max(1e-8);
    }
    model.flags = diagnose(&model, x, row_ids);
    Ok(model)
}

fn standardize(x: &DMatrix<f64>, location: &[f64], scale: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| (x[(i, j)] - location[j]) / scale[j])
}

/// Correlation of the wrapped columns over pairwise complete rows, with the
/// two regression slopes (j on k, k on j).
fn wrapped_pair(psi: &DMatrix<f64>, j: usize, k: usize) -> (f64, f64, f64) {
    let pairs: Vec<(f64, f64)> = (0..psi.nrows())
        .filter(|&i| psi[(i, j)].is_finite() && psi[(i, k)].is_finite())
        .map(|i| (psi[(i, j)], psi[(i, k)]))
        .collect();
    if pairs.len() < 3 {
        return (0.0, 0.0, 0.0);
    }
    let m = pairs.len() as f64;
    let (ma, mb) = pairs.iter().fold((0.0, 0.0), |(a, b), &(u, v)| (a + u / m, b + v / m));
    let (mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0);
    for &(u, v) in &pairs {
        saa += (u - ma) * (u - ma);
        sbb += (v - mb) * (v - mb);
        sab += (u - ma) * (v - mb);
    }
    if !(saa > 0.0 && sbb > 0.0) {
        return (0.0, 0.0, 0.0);
    }
    ((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0), sab / sbb, sab / saa)
}

/// Predictions and raw residuals on the standardized scale, and whether any
/// predictor was available for the cell.
fn predict_z(model: &DdcModel, z: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<bool>) {
    let (n, p) = z.shape();
    let mut zhat = DMatrix::zeros(n, p);
    let mut used = DMatrix::from_element(n, p, false);
    for i in 0..n {
        for j in 0..p {
            let (mut num, mut den) = (0.0, 0.0);
            for &k in &model.predictors[j] {
                let v = z[(i, k)];
                if v.is_finite() && v.abs() <= model.cutoff {
                    let w = model.correlation[(j, k)].abs();
                    num += w * model.slopes[(j, k)] * v;
                    den += w;
                }
            }
            if den > 0.0 {
                zhat[(i, j)] = num / den;
                used[(i, j)] = true;
            }
        }
    }
    let raw = z - &zhat;
    (zhat, raw, used)
}

fn diagnose(model: &DdcModel, x: &DMatrix<f64>, row_ids: Vec<usize>) -> CellFlags {
    let (n, p) = x.shape();
    let z = standardize(x, &model.location, &model.scale);
    let (zhat, raw, used) = predict_z(model, &z);
    let mut flags = vec![vec![false; p]; n];
    let mut std_residuals = vec![vec![f64::NAN; p]; n];
    let mut predictions = vec![vec![0.0; p]; n];
    let mut row_scores = vec![f64::NAN; n];
    let mut row_flags = vec![false; n];
    let prob = model.params.cell_cutoff_prob;
    for i in 0..n {
        let (mut ss, mut m) = (0.0, 0usize);
        for j in 0..p {
            predictions[i][j] = model.location[j] + model.scale[j] * zhat[(i, j)];
            // without a predictor the cell is judged on its marginal z-score
            let r = if used[(i, j)] { raw[(i, j)] / model.residual_scale[j] } else { raw[(i, j)] };
            if r.is_finite() {
                std_residuals[i][j] = r;
                flags[i][j] = r.abs() > model.cutoff;
                ss += r * r;
                m += 1;
            }
        }
        if m > 0 {
            row_scores[i] = ss / m as f64;
            row_flags[i] = row_scores[i] > chi2_quantile_f(prob, m as f64) / m as f64;
        }
    }
    CellFlags {
        row_ids,
        columns: model.columns.clone(),
        values: (0..n).map(|i| (0..p).map(|j| x[(i, j)]).collect()).collect(),
        flags,
        std_residuals,
        predictions,
        row_scores,
        row_flags,
        cutoff: model.cutoff,
    }
}

/// Runs the frozen model on new rows.
pub fn ddc_predict(model: &DdcModel, frame: &Frame) -> Result<CellFlags> {
    let x = matrix_of(frame, &model.columns)?;
    Ok(diagnose(model, &x, frame.row_ids().to_vec()))
}

/// Replaces flagged and missing cells of the model columns by their
/// predictions; every other cell is copied unchanged.
pub fn ddc_impute(model: &DdcModel, frame: &Frame) -> Result<Frame> {
    let flags = ddc_predict(model, frame)?;
    let mut out = frame.clone();
    for (j, name) in model.columns.iter().enumerate() {
        let col: Vec<Option<f64>> = frame
            .numeric(name)?
            .iter()
            .enumerate()
            .map(|(i, v)| match v {
                Some(v) if !flags.flags[i][j] => Some(*v),
                _ => Some(flags.predictions[i][j]),
            })
            .collect();
        out.replace_column(name, Column::Numeric(col))?;
    }
    Ok(out)
}
