use nalgebra::{DMatrix, DVector};

use crate::covariance::ogk::column;
use crate::covariance::{check_complete, CovMethod, LocationScatter};
use crate::error::{Result, RobError};
use crate::kernel::linalg::{column_means, covariance};
use crate::kernel::{mad, median};
use crate::scalar::{cst, Real};

/// Published constants of the tanh branch for b = 1.5, c = 4.
pub const WRAP_Q1: f64 = 1.540793;
pub const WRAP_Q2: f64 = 0.8622731;

/// z on [-b, b], q1 tanh(q2 (c - |z|)) sign(z) on b < |z| <= c, 0 beyond c.
pub fn wrap_psi<T: Real>(z: T, b: f64, c: f64) -> T {
    let a = z.abs();
    if a <= cst(b) {
        z
    } else if a <= cst(c) {
        let v: T = cst::<T>(WRAP_Q1) * (cst::<T>(WRAP_Q2) * (cst::<T>(c) - a)).tanh();
        if z < T::zero() {
            -v
        } else {
            v
        }
    } else {
        T::zero()
    }
}

/// Columns standardized by median and consistent MAD, wrapped with psi,
/// then the classical mean and covariance of the wrapped data mapped back.
pub fn fit_wrapping_cov<T: Real>(x: &DMatrix<T>, b: f64, c: f64) -> Result<LocationScatter<T>> {
    if (b - 1.5).abs() > 1e-12 || (c - 4.0).abs() > 1e-12 {
        return Err(RobError::InvalidArgument(format!(
            "wrapping constants are tabulated only for b = 1.5, c = 4 (got b = {b}, c = {c})"
        )));
    }
    check_complete(x)?;
    let (n, p) = x.shape();
    if n < 2 || p == 0 {
        return Err(RobError::EmptySample);
    }
    let mut med = DVector::zeros(p);
    let mut sc = DVector::zeros(p);
    for j in 0..p {
        let col = column(x, j);
        med[j] = median(&col)?;
        sc[j] = mad(&col, true)?;
        if !(sc[j] > T::zero()) {
            return Err(RobError::ZeroRobustScale(format!("column {j}")));
        }
    }
    let w = DMatrix::from_fn(n, p, |i, j| wrap_psi((x[(i, j)] - med[j]) / sc[j], b, c));
    let wm = column_means(&w);
    let loc = DVector::from_fn(p, |j, _| med[j] + sc[j] * wm[j]);
    let d = DMatrix::from_diagonal(&sc);
    let scatter = &d * covariance(&w, 1) * &d;
    Ok(LocationScatter::plain(loc, scatter, CovMethod::Wrapping))
}
