use crate::error::{Result, RobError};
use crate::kernel::{mad, median, norm_cdf, norm_pdf, norm_ppf};
use crate::scalar::{cst, from_usize, Real};
use crate::univariate::{UnivariateFit, UnivariateMethod};

/// E[min(Z^2, b^2)] with b = c2 Phi^-1(3/4): the squared tau scale at the
/// standard normal when the initial scale is the raw MAD.
pub fn tau_consistency(c2: f64) -> f64 {
    let b = c2 * norm_ppf(0.75);
    2.0 * ((1.0 - b * b) * norm_cdf(b) - b * norm_pdf(b) + b * b) - 1.0
}

/// Tau location and scale around the raw MAD, with weights
/// W(u) = (1 - (u/c1)^2)^2 on |u| <= c1 and rho(u) = min(c2^2, u^2).
/// With `consistent`, the scale is divided by the square root of its normal expectation.
pub fn fit_tau<T: Real>(x: &[T], c1: f64, c2: f64, consistent: bool) -> Result<UnivariateFit<T>> {
    if x.len() < 2 {
        return Err(RobError::InvalidArgument(format!("tau needs n >= 2, got {}", x.len())));
    }
    if !(c1 > 0.0 && c2 > 0.0) {
        return Err(RobError::InvalidArgument("tau tuning constants must be positive".into()));
    }
    let med = median(x)?;
    let s0 = mad(x, false)?;
    if !(s0 > T::zero()) {
        return Err(RobError::DegenerateScale);
    }
    let k1: T = cst(c1);
    let k2: T = cst(c2);
    let (mut sw, mut swx) = (T::zero(), T::zero());
    for &v in x {
        let u = (v - med) / s0;
        if u.abs() <= k1 {
            let t = T::one() - (u / k1) * (u / k1);
            sw += t * t;
            swx += t * t * v;
        }
    }
    let location = swx / sw;
    let mut rho = T::zero();
    for &v in x {
        let u = (v - location) / s0;
        rho += (u * u).min(k2 * k2);
    }
    let mut scale = s0 * (rho / from_usize::<T>(x.len())).sqrt();
    if consistent {
        scale /= cst::<T>(tau_consistency(c2).sqrt());
    }
    let mut fit = UnivariateFit::simple(location, scale, UnivariateMethod::Tau, consistent);
    fit.raw_location = med;
    fit.raw_scale = s0;
    Ok(fit)
}
