use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cellwise::ddc::fit_ddc_matrix;
use crate::cellwise::{CellFlags, DdcParams};
use crate::covariance::fit_det_mcd;
use crate::error::{Result, RobError};
use crate::kernel::distr::chi2_quantile_f;
use crate::kernel::linalg::floor_eigenvalues;
use crate::univariate::OneStepM;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellMcdOptions {
    pub alpha: f64,
    pub cutoff_prob: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for CellMcdOptions {
    fn default() -> Self {
        CellMcdOptions { alpha: 0.75, cutoff_prob: 0.99, max_iter: 100, tol: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMcdFit {
    pub location: DVector<f64>,
    pub scatter: DMatrix<f64>,
    /// Unflagged indicator; false for flagged and for missing cells.
    pub w: Vec<Vec<bool>>,
    /// Conditional mean of each cell given the other unflagged cells of its row.
    pub predictions: DMatrix<f64>,
    pub conditional_sd: DMatrix<f64>,
    /// (x - prediction) / conditional_sd, NaN where missing.
    pub std_residuals: DMatrix<f64>,
    /// Data with flagged and missing cells replaced by their conditional means
    /// given the unflagged cells.
    pub imputed: DMatrix<f64>,
    pub data: DMatrix<f64>,
    /// Objective after each iteration, on the standardized scale.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    pub h: usize,
    /// Per-column penalty for flagging a cell.
    pub penalties: Vec<f64>,
    pub cutoff: f64,
    pub options: CellMcdOptions,
    pub column_location: Vec<f64>,
    pub column_scale: Vec<f64>,
}

impl CellMcdFit {
    /// Flagged cells: observed but not in W.
    pub fn flags(&self) -> Vec<Vec<bool>> {
        let (n, p) = self.data.shape();
        (0..n).map(|i| (0..p).map(|j| self.data[(i, j)].is_finite() && !self.w[i][j]).collect()).collect()
    }

    pub fn n_flagged(&self) -> usize {
        self.flags().iter().flatten().filter(|&&f| f).count()
    }

    /// Cell diagnostics in the shared [`CellFlags`] layout; the row score is the
    /// mean squared standardized residual.
    pub fn cell_flags(&self, row_ids: Vec<usize>, columns: Vec<String>) -> Result<CellFlags> {
        let (n, p) = self.data.shape();
        if row_ids.len() != n || columns.len() != p {
            return Err(RobError::LengthMismatch(format!("expected {n} row ids and {p} columns")));
        }
        let flags = self.flags();
        let std_residuals: Vec<Vec<f64>> = (0..n).map(|i| (0..p).map(|j| self.std_residuals[(i, j)]).collect()).collect();
        let mut row_scores = vec![f64::NAN; n];
        let mut row_flags = vec![false; n];
        for i in 0..n {
            let r: Vec<f64> = std_residuals[i].iter().copied().filter(|v| v.is_finite()).collect();
            if !r.is_empty() {
                let m = r.len() as f64;
                row_scores[i] = r.iter().map(|v| v * v).sum::<f64>() / m;
                row_flags[i] = row_scores[i] > chi2_quantile_f(self.options.cutoff_prob, m) / m;
            }
        }
        Ok(CellFlags {
            row_ids,
            columns,
            values: (0..n).map(|i| (0..p).map(|j| self.data[(i, j)]).collect()).collect(),
            flags,
            std_residuals,
            predictions: (0..n).map(|i| (0..p).map(|j| self.predictions[(i, j)]).collect()).collect(),
            row_scores,
            row_flags,
            cutoff: self.cutoff,
        })
    }
}

fn sub(s: &DMatrix<f64>, a: &[usize], b: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.len(), b.len(), |i, j| s[(a[i], b[j])])
}

/// Gaussian pieces for one row given an observed set: (log det, squared
/// distance, conditional means and covariance of the targets).
struct Conditional {
    logdet: f64,
    dist2: f64,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

fn conditional(x: &[f64], mu: &DVector<f64>, sigma: &DMatrix<f64>, obs: &[usize], targets: &[usize]) -> Conditional {
    let mu_t = DVector::from_iterator(targets.len(), targets.iter().map(|&k| mu[k]));
    let s_tt = sub(sigma, targets, targets);
    if obs.is_empty() {
        return Conditional { logdet: 0.0, dist2: 0.0, mean: mu_t, cov: s_tt };
    }
    let s_oo = sub(sigma, obs, obs);
    let chol = s_oo.cholesky().expect("floored scatter is positive definite");
    let logdet = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let dev = DVector::from_iterator(obs.len(), obs.iter().map(|&k| x[k] - mu[k]));
    let sol = chol.solve(&dev);
    let dist2 = dev.dot(&sol);
    if targets.is_empty() {
        return Conditional { logdet, dist2, mean: mu_t, cov: s_tt };
    }
    let s_to = sub(sigma, targets, obs);
    let mean = mu_t + &s_to * sol;
    let cov = s_tt - &s_to * chol.solve(&s_to.transpose());
    Conditional { logdet, dist2, mean, cov }
}

fn observed(w: &[bool], skip: Option<usize>) -> Vec<usize> {
    (0..w.len()).filter(|&k| w[k] && Some(k) != skip).collect()
}

fn objective(z: &DMatrix<f64>, w: &[Vec<bool>], mu: &DVector<f64>, sigma: &DMatrix<f64>, q: &[f64]) -> f64 {
    let p = z.ncols();
    let rows: Vec<f64> = (0..z.nrows())
        .into_par_iter()
        .map(|i| {
            let x: Vec<f64> = z.row(i).iter().copied().collect();
            let obs = observed(&w[i], None);
            let c = conditional(&x, mu, sigma, &obs, &[]);
            let penalty: f64 = (0..p).filter(|&j| x[j].is_finite() && !w[i][j]).map(|j| q[j]).sum();
            c.logdet + c.dist2 + obs.len() as f64 * LN_2PI + penalty
        })
        .collect();
    rows.iter().sum()
}

/// Column-by-column W update: each column keeps its h cheapest cells plus
/// every cell whose likelihood cost is below the flagging penalty.
fn update_w(z: &DMatrix<f64>, w: &mut [Vec<bool>], mu: &DVector<f64>, sigma: &DMatrix<f64>, q: &[f64], h: usize) {
    let (n, p) = z.shape();
    for j in 0..p {
        let delta: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let xij = z[(i, j)];
                if !xij.is_finite() {
                    return f64::INFINITY;
                }
                let x: Vec<f64> = z.row(i).iter().copied().collect();
                let c = conditional(&x, mu, sigma, &observed(&w[i], Some(j)), &[j]);
                let v = c.cov[(0, 0)];
                let r = xij - c.mean[0];
                r * r / v + v.ln() + LN_2PI
            })
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| delta[a].total_cmp(&delta[b]).then(a.cmp(&b)));
        for (rank, &i) in order.iter().enumerate() {
            w[i][j] = delta[i].is_finite() && (rank < h || delta[i] <= q[j]);
        }
    }
}

/// Conditional-expectation M-step followed by the eigenvalue floor.
fn update_moments(z: &DMatrix<f64>, w: &[Vec<bool>], mu: &DVector<f64>, sigma: &DMatrix<f64>, floor: f64) -> (DVector<f64>, DMatrix<f64>) {
    let (n, p) = z.shape();
    let parts: Vec<(DVector<f64>, DMatrix<f64>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x: Vec<f64> = z.row(i).iter().copied().collect();
            let obs = observed(&w[i], None);
            let mis: Vec<usize> = (0..p).filter(|&k| !w[i][k]).collect();
            let c = conditional(&x, mu, sigma, &obs, &mis);
            let mut xt = DVector::from_vec(x);
            let mut cov = DMatrix::zeros(p, p);
            for (a, &ka) in mis.iter().enumerate() {
                xt[ka] = c.mean[a];
                for (b, &kb) in mis.iter().enumerate() {
                    cov[(ka, kb)] = c.cov[(a, b)];
                }
            }
            (xt, cov)
        })
        .collect();
    let nf = n as f64;
    let mut mean = DVector::zeros(p);
    for (xt, _) in &parts {
        mean += xt / nf;
    }
    let mut s = DMatrix::zeros(p, p);
    for (xt, cov) in &parts {
        let d = xt - &mean;
        s += (&d * d.transpose() + cov) / nf;
    }
    let s = (&s + s.transpose()) * 0.5;
    (mean, floor_eigenvalues(&s, floor).0)
}

/// Cellwise MCD on an n x p matrix with NaN for missing cells.
pub fn fit_cellmcd(x: &DMatrix<f64>, opts: &CellMcdOptions) -> Result<CellMcdFit> {
    let (n, p) = x.shape();
    if !(0.5..=1.0).contains(&opts.alpha) {
        return Err(RobError::InvalidArgument(format!("alpha must lie in [0.5, 1], got {}", opts.alpha)));
    }
    if !(opts.cutoff_prob > 0.5 && opts.cutoff_prob < 1.0) {
        return Err(RobError::InvalidArgument(format!("cutoff_prob must lie in (0.5, 1), got {}", opts.cutoff_prob)));
    }
    if p < 2 || n <= 5 * p {
        return Err(RobError::InvalidArgument(format!("cellwise MCD needs p >= 2 and n > 5p, got n = {n}, p = {p}")));
    }
    if x.iter().any(|v| v.is_infinite()) {
        return Err(RobError::InvalidArgument("infinite cell values".into()));
    }
    let h = ((opts.alpha * n as f64) + 1e-9).floor() as usize;
    let mut column_location = Vec::with_capacity(p);
    let mut column_scale = Vec::with_capacity(p);
    for j in 0..p {
        let v: Vec<f64> = x.column(j).iter().copied().filter(|v| v.is_finite()).collect();
        if v.len() < h {
            return Err(RobError::Infeasible(format!("column {j} has {} observed cells, at least {h} needed", v.len())));
        }
        let f = OneStepM::cellwise().fit(&v).map_err(|_| RobError::ZeroRobustScale(format!("column {j}")))?;
        if !(f.scale > 0.0) {
            return Err(RobError::ZeroRobustScale(format!("column {j}")));
        }
        column_location.push(f.location);
        column_scale.push(f.scale);
    }
    let z = DMatrix::from_fn(n, p, |i, j| (x[(i, j)] - column_location[j]) / column_scale[j]);

    // start: DetMCD on the DDC-imputed standardized data
    let names = (0..p).map(|j| format!("c{j}")).collect();
    let ddc = fit_ddc_matrix(&z, names, (0..n).collect(), &DdcParams::default())?;
    let zi = DMatrix::from_fn(n, p, |i, j| {
        if z[(i, j)].is_finite() && !ddc.flags.flags[i][j] {
            z[(i, j)]
        } else {
            ddc.flags.predictions[i][j]
        }
    });
    let start = fit_det_mcd(&zi, opts.alpha, true)?;
    let floor = 1e-6 * start.scatter.trace() / p as f64;
    let mut mu = start.location;
    let mut sigma = floor_eigenvalues(&start.scatter, floor).0;

    let chi = chi2_quantile_f(opts.cutoff_prob, 1.0);
    let prec = sigma.clone().cholesky().ok_or(RobError::SingularScatter)?.inverse();
    let q: Vec<f64> = (0..p).map(|j| chi + LN_2PI - prec[(j, j)].ln()).collect();

    let mut w: Vec<Vec<bool>> = (0..n).map(|i| (0..p).map(|j| z[(i, j)].is_finite()).collect()).collect();
    let mut trace = Vec::new();
    let mut prev = objective(&z, &w, &mu, &sigma, &q);
    let mut converged = false;
    for _ in 0..opts.max_iter {
        update_w(&z, &mut w, &mu, &sigma, &q, h);
        let mid = objective(&z, &w, &mu, &sigma, &q);
        let (m, s) = update_moments(&z, &w, &mu, &sigma, floor);
        mu = m;
        sigma = s;
        let obj = objective(&z, &w, &mu, &sigma, &q);
        let slack = 1e-9 * prev.abs().max(1.0);
        debug_assert!(mid <= prev + slack && obj <= mid + slack, "cellwise MCD objective increased");
        trace.push(obj);
        let change = (prev - obj).abs() / prev.abs().max(1.0);
        prev = obj;
        if change < opts.tol {
            converged = true;
            break;
        }
    }

    let mut predictions = DMatrix::zeros(n, p);
    let mut conditional_sd = DMatrix::zeros(n, p);
    let mut std_residuals = DMatrix::from_element(n, p, f64::NAN);
    let mut imputed = x.clone();
    for i in 0..n {
        let row: Vec<f64> = z.row(i).iter().copied().collect();
        for j in 0..p {
            let c = conditional(&row, &mu, &sigma, &observed(&w[i], Some(j)), &[j]);
            let sd = c.cov[(0, 0)].max(0.0).sqrt();
            predictions[(i, j)] = column_location[j] + column_scale[j] * c.mean[0];
            conditional_sd[(i, j)] = column_scale[j] * sd;
            if row[j].is_finite() {
                std_residuals[(i, j)] = (row[j] - c.mean[0]) / sd;
            }
        }
        let mis: Vec<usize> = (0..p).filter(|&k| !w[i][k]).collect();
        if !mis.is_empty() {
            let c = conditional(&row, &mu, &sigma, &observed(&w[i], None), &mis);
            for (a, &k) in mis.iter().enumerate() {
                imputed[(i, k)] = column_location[k] + column_scale[k] * c.mean[a];
            }
        }
    }
    let d = DMatrix::from_diagonal(&DVector::from_vec(column_scale.clone()));
    let location = DVector::from_fn(p, |j, _| column_location[j] + column_scale[j] * mu[j]);
    let scatter = &d * &sigma * &d;
    Ok(CellMcdFit {
        location,
        scatter,
        w,
        predictions,
        conditional_sd,
        std_residuals,
        imputed,
        data: x.clone(),
        objective_trace: trace,
        converged,
        h,
        penalties: q,
        cutoff: chi.sqrt(),
        options: *opts,
        column_location,
        column_scale,
    })
}
