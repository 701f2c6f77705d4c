use crate::error::{Result, RobError};
use crate::kernel::distr::{chi2_cdf, chi2_quantile_f};
use crate::scalar::{cst, from_usize, sorted, Real};
use crate::univariate::{UnivariateFit, UnivariateMethod};

/// Variance factor alpha / F_{chi2_3}(chi2_1 alpha-quantile).
pub(crate) fn umcd_consistency(alpha: f64) -> f64 {
    if alpha >= 1.0 {
        return 1.0;
    }
    alpha / chi2_cdf(chi2_quantile_f(alpha, 1.0), 3.0)
}

fn mean_sd<T: Real>(w: &[T]) -> (T, T) {
    let n: T = from_usize(w.len());
    let m = w.iter().fold(T::zero(), |a, &b| a + b) / n;
    let ss = w.iter().fold(T::zero(), |a, &b| a + (b - m) * (b - m));
    (m, (ss / (n - T::one())).sqrt())
}

/// Start of the contiguous window of length h with the smallest variance
/// (first one on ties).
pub(crate) fn best_window<T: Real>(s: &[T], h: usize) -> usize {
    let n = s.len();
    let c = s[n / 2];
    let hh: T = from_usize(h);
    let mut sum = T::zero();
    let mut sq = T::zero();
    for &v in &s[..h] {
        sum += v - c;
        sq += (v - c) * (v - c);
    }
    let mut ssd = Vec::with_capacity(n - h + 1);
    ssd.push(sq - sum * sum / hh);
    for i in 1..=(n - h) {
        let out = s[i - 1] - c;
        let inn = s[i + h - 1] - c;
        sum += inn - out;
        sq += inn * inn - out * out;
        ssd.push(sq - sum * sum / hh);
    }
    let best = ssd.iter().copied().fold(ssd[0], |m, v| if v < m { v } else { m });
    // Running sums blur near-ties, so candidates close to the best are re-scored exactly.
    let spread = s[n - 1] - s[0];
    let tol = spread * spread * hh * cst(1e-10);
    let exact = |i: usize| {
        let w = &s[i..i + h];
        let (m, _) = mean_sd(w);
        w.iter().fold(T::zero(), |a, &b| a + (b - m) * (b - m))
    };
    let mut start = usize::MAX;
    let mut best_exact = T::zero();
    for (i, &v) in ssd.iter().enumerate() {
        if v <= best + tol {
            let e = exact(i);
            if start == usize::MAX || e < best_exact {
                best_exact = e;
                start = i;
            }
        }
    }
    start
}

/// Univariate MCD with h = floor(alpha n): mean and standard deviation of the
/// h-subset of smallest variance, optionally made consistent and reweighted.
pub fn fit_univariate_mcd<T: Real>(x: &[T], alpha: f64, reweight: bool, consistent: bool) -> Result<UnivariateFit<T>> {
    let n = x.len();
    if !(0.5..=1.0).contains(&alpha) {
        return Err(RobError::InvalidArgument(format!("alpha must lie in [0.5, 1], got {alpha}")));
    }
    if n < 4 {
        return Err(RobError::InvalidArgument(format!("univariate MCD needs n >= 4, got {n}")));
    }
    let h = (alpha * n as f64).floor() as usize;
    if h < 2 {
        return Err(RobError::InvalidArgument(format!("h = {h} is below 2")));
    }
    let s = sorted(x);
    let start = best_window(&s, h);
    let (raw_loc, raw_sd) = mean_sd(&s[start..start + h]);
    let mut fit = UnivariateFit {
        location: raw_loc,
        scale: raw_sd,
        method: UnivariateMethod::Umcd,
        h: Some(h),
        consistency_applied: consistent,
        raw_location: raw_loc,
        raw_scale: raw_sd,
        degenerate: false,
    };
    if raw_sd == T::zero() {
        fit.degenerate = true;
        return Ok(fit);
    }
    let frac = h as f64 / n as f64;
    if consistent {
        fit.raw_scale = raw_sd * cst::<T>(umcd_consistency(frac).sqrt());
        fit.scale = fit.raw_scale;
    }
    if reweight {
        let cut: T = cst(chi2_quantile_f(0.975, 1.0).sqrt());
        let kept: Vec<T> = x.iter().copied().filter(|&v| ((v - fit.raw_location) / fit.raw_scale).abs() <= cut).collect();
        if kept.len() >= 2 {
            let (m, sd) = mean_sd(&kept);
            fit.location = m;
            let kept_frac = kept.len() as f64 / n as f64;
            fit.scale = if consistent { sd * cst::<T>(umcd_consistency(kept_frac).sqrt()) } else { sd };
        }
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_point_example() {
        let f = fit_univariate_mcd(&[0.0_f64, 1.0, 2.0, 3.0, 100.0], 0.8, false, false).unwrap();
        assert_eq!(f.h, Some(4));
        assert!((f.location - 1.5).abs() < 1e-14);
        assert!((f.scale - (5.0_f64 / 3.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn full_subset_is_mean_and_sd() {
        let x = [3.0_f64, -1.0, 4.0, 1.0, 5.0, 9.0];
        let f = fit_univariate_mcd(&x, 1.0, false, false).unwrap();
        let (m, sd) = mean_sd(&x);
        assert!((f.location - m).abs() < 1e-14 && (f.scale - sd).abs() < 1e-14);
    }

    #[test]
    fn shift_equivariance() {
        let x = [0.3_f64, 1.7, 2.2, -0.4, 8.0, 1.1, 0.9];
        let a = fit_univariate_mcd(&x, 0.75, true, true).unwrap();
        let y: Vec<f64> = x.iter().map(|v| v + 10.0).collect();
        let b = fit_univariate_mcd(&y, 0.75, true, true).unwrap();
        assert!((b.location - a.location - 10.0).abs() < 1e-12);
        assert!((b.scale - a.scale).abs() < 1e-12);
    }

    #[test]
    fn identical_points_are_degenerate() {
        let f = fit_univariate_mcd(&[2.0_f64; 8], 0.75, true, true).unwrap();
        assert!(f.degenerate);
        assert_eq!(f.scale, 0.0);
    }

    #[test]
    fn rejects_small_h() {
        assert!(fit_univariate_mcd(&[1.0_f64, 2.0, 3.0], 0.75, false, false).is_err());
        assert!(fit_univariate_mcd(&[1.0_f64, 2.0, 3.0, 4.0], 0.4, false, false).is_err());
    }

    #[test]
    fn consistency_factor_above_one() {
        assert!(umcd_consistency(0.75) > 1.0);
        assert_eq!(umcd_consistency(1.0), 1.0);
    }
}
