//! Robust linear regression and the residual/leverage outlier map.

mod lts;
mod mm;
mod s;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::covariance::{chi2_cutoff, fit_det_mcd, robust_distances, LocationScatter};
use crate::error::{Result, RobError};
use crate::kernel::lstsq;
use crate::scalar::{cst, Real};

pub use lts::{fit_fast_lts, lts_consistency, LtsOptions};
pub use mm::{bisquare_efficiency_constant, fit_mm_regression};
pub use s::{fit_s_regression, m_scale, SOptions, S_BISQUARE_C};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegMethod {
    FastLts,
    S,
    Mm,
    Ols,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit<T: Real> {
    pub coefficients: DVector<T>,
    pub intercept: T,
    pub residual_scale: T,
    pub method: RegMethod,
    /// DetMCD on the predictors, used for leverage distances.
    pub x_model: Option<LocationScatter<T>>,
    pub converged: bool,
    pub h: Option<usize>,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
    /// Trimmed sum of squares (LTS) or M-scale (S, MM) at the raw solution.
    pub objective: Option<T>,
    /// At least h residuals are exactly zero.
    pub exact_fit: bool,
    pub has_intercept: bool,
}

impl<T: Real> RegressionFit<T> {
    fn assemble(beta: &DVector<T>, intercept: bool, scale: T, method: RegMethod) -> Self {
        let (coefficients, b0) = split(beta, intercept);
        RegressionFit {
            coefficients,
            intercept: b0,
            residual_scale: scale,
            method,
            x_model: None,
            converged: true,
            h: None,
            alpha: None,
            seed: None,
            objective: None,
            exact_fit: false,
            has_intercept: intercept,
        }
    }
}

/// Design matrix with a leading column of ones when `intercept` is set.
pub(crate) fn design<T: Real>(x: &DMatrix<T>, intercept: bool) -> DMatrix<T> {
    if intercept {
        x.clone().insert_column(0, T::one())
    } else {
        x.clone()
    }
}

fn split<T: Real>(beta: &DVector<T>, intercept: bool) -> (DVector<T>, T) {
    if intercept {
        (beta.rows(1, beta.len() - 1).into_owned(), beta[0])
    } else {
        (beta.clone(), T::zero())
    }
}

pub(crate) fn validate<T: Real>(x: &DMatrix<T>, y: &DVector<T>, intercept: bool) -> Result<()> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(RobError::LengthMismatch(format!("X has {n} rows, y has {}", y.len())));
    }
    let q = p + usize::from(intercept);
    if q == 0 {
        return Err(RobError::InvalidArgument("no coefficients to estimate".into()));
    }
    if n <= 2 * q {
        return Err(RobError::InvalidArgument(format!("need n > 2(p+1), got n={n} with {q} coefficients")));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(RobError::Domain("data contain missing or non-finite values".into()));
    }
    Ok(())
}

/// Leverage model: DetMCD on the predictors, or None when it cannot be fitted
/// (too few rows, degenerate columns).
pub(crate) fn leverage_model<T: Real>(x: &DMatrix<T>) -> Option<LocationScatter<T>> {
    if x.ncols() == 0 {
        return None;
    }
    fit_det_mcd(x, 0.5, true).ok()
}

/// Ordinary least squares.
pub fn fit_ols<T: Real>(x: &DMatrix<T>, y: &DVector<T>, intercept: bool) -> Result<RegressionFit<T>> {
    validate(x, y, intercept)?;
    let a = design(x, intercept);
    let beta = lstsq(&a, y).ok_or(RobError::DegenerateDesign)?;
    let r = y - &a * &beta;
    let dof = a.nrows() - a.ncols();
    let scale = (r.norm_squared() / cst::<T>(dof as f64)).sqrt();
    Ok(RegressionFit::assemble(&beta, intercept, scale, RegMethod::Ols))
}

/// X beta + intercept.
pub fn predict<T: Real>(fit: &RegressionFit<T>, x: &DMatrix<T>) -> Result<DVector<T>> {
    if x.ncols() != fit.coefficients.len() {
        return Err(RobError::LengthMismatch(format!(
            "model has {} predictors, data has {} columns",
            fit.coefficients.len(),
            x.ncols()
        )));
    }
    Ok(x * &fit.coefficients + DVector::from_element(x.nrows(), fit.intercept))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointClass {
    Regular,
    Vertical,
    GoodLeverage,
    BadLeverage,
}

impl PointClass {
    pub fn classify(std_residual: f64, distance: f64, v_threshold: f64, h_threshold: f64) -> Self {
        match (std_residual.abs() > v_threshold, distance > h_threshold) {
            (false, false) => PointClass::Regular,
            (true, false) => PointClass::Vertical,
            (false, true) => PointClass::GoodLeverage,
            (true, true) => PointClass::BadLeverage,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            PointClass::Regular => "regular",
            PointClass::Vertical => "vertical",
            PointClass::GoodLeverage => "good_leverage",
            PointClass::BadLeverage => "bad_leverage",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierMapData<T: Real> {
    pub std_residuals: DVector<T>,
    pub x_distances: DVector<T>,
    pub v_threshold: f64,
    pub h_threshold: f64,
    pub classes: Vec<PointClass>,
}

/// Standardized residuals against robust distances of the predictor rows.
pub fn outlier_map_data<T: Real>(fit: &RegressionFit<T>, x: &DMatrix<T>, y: &DVector<T>) -> Result<OutlierMapData<T>> {
    if y.len() != x.nrows() {
        return Err(RobError::LengthMismatch(format!("X has {} rows, y has {}", x.nrows(), y.len())));
    }
    let model = fit
        .x_model
        .as_ref()
        .ok_or_else(|| RobError::InvalidArgument("fit has no predictor model for leverage distances".into()))?;
    if !(fit.residual_scale > T::zero()) {
        return Err(RobError::DegenerateScale);
    }
    let r = (y - predict(fit, x)?) / fit.residual_scale;
    let d = robust_distances(model, x)?;
    let v_threshold = 2.5;
    let h_threshold = chi2_cutoff(x.ncols(), 0.975);
    let classes = r
        .iter()
        .zip(d.iter())
        .map(|(&a, &b)| PointClass::classify(crate::as_f64(a), crate::as_f64(b), v_threshold, h_threshold))
        .collect();
    Ok(OutlierMapData { std_residuals: r, x_distances: d, v_threshold, h_threshold, classes })
}

/// Solves the least squares problem on the given rows of the design.
pub(crate) fn ls_on_rows<T: Real>(a: &DMatrix<T>, y: &DVector<T>, rows: &[usize]) -> Option<DVector<T>> {
    let sub = crate::kernel::linalg::select_rows(a, rows);
    let ys = DVector::from_iterator(rows.len(), rows.iter().map(|&i| y[i]));
    lstsq(&sub, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_way_rule() {
        assert_eq!(PointClass::classify(0.0, 0.0, 2.5, 2.0), PointClass::Regular);
        assert_eq!(PointClass::classify(-3.0, 1.0, 2.5, 2.0), PointClass::Vertical);
        assert_eq!(PointClass::classify(1.0, 3.0, 2.5, 2.0), PointClass::GoodLeverage);
        assert_eq!(PointClass::classify(3.0, 3.0, 2.5, 2.0), PointClass::BadLeverage);
        assert_eq!(PointClass::classify(2.5, 2.0, 2.5, 2.0), PointClass::Regular);
    }

    #[test]
    fn predict_basics() {
        let fit = RegressionFit::assemble(&DVector::from_vec(vec![1.0, 2.0, -1.0]), true, 1.0, RegMethod::Ols);
        let zero = DMatrix::zeros(3, 2);
        assert_eq!(predict(&fit, &zero).unwrap(), DVector::from_element(3, 1.0));
        let one = DMatrix::from_row_slice(1, 2, &[3.0, 4.0]);
        assert_eq!(predict(&fit, &one).unwrap()[0], 1.0 + 6.0 - 4.0);
        assert!(predict(&fit, &DMatrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn ols_fitted_values() {
        let x = DMatrix::from_fn(20, 1, |i, _| i as f64);
        let y = DVector::from_fn(20, |i, _| 3.0 - 0.5 * i as f64 + if i % 2 == 0 { 0.1 } else { -0.1 });
        let fit = fit_ols(&x, &y, true).unwrap();
        let yhat = predict(&fit, &x).unwrap();
        let a = design(&x, true);
        let beta = lstsq(&a, &y).unwrap();
        assert!((yhat - &a * beta).norm() < 1e-12);
    }
}
