use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};

use crate::covariance::ogk::column;
use crate::covariance::{check_complete, CovMethod, LocationScatter};
use crate::error::{Result, RobError};
use crate::kernel::linalg::floor_eigenvalues;
use crate::kernel::median;
use crate::scalar::{as_f64, cst, from_usize, Real};
use crate::univariate::fit_qn;

/// Kendall's tau-b; pairs tied in both coordinates are ignored.
pub fn kendall_tau_b<T: Real>(x: &[T], y: &[T]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(RobError::LengthMismatch(format!("{} vs {}", x.len(), y.len())));
    }
    let n = x.len();
    if n < 2 {
        return Err(RobError::EmptySample);
    }
    let (mut conc, mut tx, mut ty) = (0i64, 0i64, 0i64);
    let mut total = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            let a = as_f64(x[i] - x[j]);
            let b = as_f64(y[i] - y[j]);
            match (a == 0.0, b == 0.0) {
                (true, true) => continue,
                (true, false) => tx += 1,
                (false, true) => ty += 1,
                (false, false) => conc += if (a > 0.0) == (b > 0.0) { 1 } else { -1 },
            }
            total += 1;
        }
    }
    let denom = (((total - tx) as f64) * ((total - ty) as f64)).sqrt();
    if denom == 0.0 {
        return Err(RobError::DegenerateScale);
    }
    Ok(conc as f64 / denom)
}

/// Sigma_jk = sin(pi/2 tau_jk) Qn_j Qn_k, location = medians. Negative
/// eigenvalues are floored at 1e-12 trace / p.
pub fn fit_kendall_tau_cov<T: Real>(x: &DMatrix<T>) -> Result<LocationScatter<T>> {
    check_complete(x)?;
    let (n, p) = x.shape();
    if n < 2 || p == 0 {
        return Err(RobError::EmptySample);
    }
    let cols: Vec<Vec<T>> = (0..p).map(|j| column(x, j)).collect();
    let mut s = DVector::zeros(p);
    let mut loc = DVector::zeros(p);
    for j in 0..p {
        let q = fit_qn(&cols[j])?.scale;
        if !(q > T::zero()) {
            return Err(RobError::ZeroRobustScale(format!("column {j}")));
        }
        s[j] = q;
        loc[j] = median(&cols[j])?;
    }
    let mut sigma = DMatrix::from_diagonal(&s.map(|v| v * v));
    for j in 0..p {
        for k in (j + 1)..p {
            let r: T = cst((FRAC_PI_2 * kendall_tau_b(&cols[j], &cols[k])?).sin());
            sigma[(j, k)] = r * s[j] * s[k];
            sigma[(k, j)] = sigma[(j, k)];
        }
    }
    let floor = sigma.trace() * cst(1e-12) / from_usize(p);
    let (fixed, changed) = floor_eigenvalues(&sigma, floor);
    let mut fit = LocationScatter::plain(loc, if changed { fixed } else { sigma }, CovMethod::KendallTau);
    fit.eigen_floored = changed;
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_gives_one() {
        let x: Vec<f64> = (0..30).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        assert!((kendall_tau_b(&x, &y).unwrap() - 1.0).abs() < 1e-15);
        let m = DMatrix::from_fn(30, 2, |i, j| if j == 0 { x[i] } else { y[i] });
        let f = fit_kendall_tau_cov(&m).unwrap();
        let qx = fit_qn(&x).unwrap().scale;
        let qy = fit_qn(&y).unwrap().scale;
        assert!((f.scatter[(0, 1)] - qx * qy).abs() < 1e-9 * qx * qy);
        // the rank-one matrix gets its zero eigenvalue floored
        assert!((f.scatter[(0, 0)] - qx * qx).abs() < 1e-6 * qx * qx);
        assert!(f.eigen_floored);
    }

    #[test]
    fn ties_use_tau_b() {
        let x = [1.0, 1.0, 2.0, 3.0];
        let y = [1.0, 2.0, 2.0, 3.0];
        // 6 pairs: one tie in x, one in y, four concordant.
        let expect = 4.0 / (5.0f64 * 5.0).sqrt();
        assert!((kendall_tau_b(&x, &y).unwrap() - expect).abs() < 1e-15);
    }
}
