use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Result, RobError};

fn std_normal() -> Normal {
    Normal::standard()
}

pub fn norm_cdf(x: f64) -> f64 {
    std_normal().cdf(x)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile, polished by one Newton step on the CDF.
pub fn norm_ppf(p: f64) -> f64 {
    let x = std_normal().inverse_cdf(p);
    if !x.is_finite() {
        return x;
    }
    let d = norm_pdf(x);
    if d > 0.0 {
        x - (norm_cdf(x) - p) / d
    } else {
        x
    }
}

/// Chi-square CDF with (possibly fractional) degrees of freedom.
pub fn chi2_cdf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        gamma_lr(df / 2.0, x / 2.0)
    }
}

fn chi2_log_pdf(x: f64, df: f64) -> f64 {
    let k = df / 2.0;
    (k - 1.0) * x.ln() - x / 2.0 - k * std::f64::consts::LN_2 - ln_gamma(k)
}

/// Inverse chi-square CDF, refined by safeguarded Newton steps on the CDF.
pub fn chi2_quantile(prob: f64, df: u32) -> Result<f64> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(RobError::InvalidArgument(format!("probability {prob} outside (0, 1)")));
    }
    if df == 0 {
        return Err(RobError::InvalidArgument("degrees of freedom must be positive".into()));
    }
    Ok(chi2_quantile_f(prob, df as f64))
}

pub(crate) fn chi2_quantile_f(prob: f64, df: f64) -> f64 {
    let z = norm_ppf(prob);
    let a = 2.0 / (9.0 * df);
    let mut x = (df * (1.0 - a + z * a.sqrt()).powi(3)).max(1e-8);
    let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
    for _ in 0..200 {
        let f = chi2_cdf(x, df) - prob;
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step = f / chi2_log_pdf(x, df).exp();
        let mut next = x - step;
        if !next.is_finite() || next <= lo || next >= hi {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * x.max(1.0) };
        }
        if (next - x).abs() <= 1e-15 * x.max(1e-300) {
            return next;
        }
        x = next;
    }
    x
}

/// 1 - (1 - eps)^p: chance that a row of p independently contaminated cells holds at least one outlier.
pub fn propagation_fraction(eps: f64, p: u32) -> f64 {
    1.0 - (1.0 - eps).powi(p as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_two_df_is_two_ln_two() {
        let q = chi2_quantile(0.5, 2).unwrap();
        assert!((q - 2.0 * std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn tiny_prob_goes_to_zero() {
        assert!(chi2_quantile(1e-300, 3).unwrap() < 1e-100);
    }

    #[test]
    fn prob_outside_unit_interval_rejected() {
        assert!(chi2_quantile(1.0, 2).is_err());
        assert!(chi2_quantile(0.0, 2).is_err());
    }

    #[test]
    fn propagation_examples() {
        assert_eq!(propagation_fraction(0.0, 7), 0.0);
        assert!((propagation_fraction(0.3, 1) - 0.3).abs() < 1e-15);
        assert!((propagation_fraction(0.05, 10) - 0.401_263_060_761_621_1).abs() < 1e-12);
    }

    #[test]
    fn normal_round_trip() {
        for &p in &[0.01, 0.25, 0.5, 0.975] {
            assert!((norm_cdf(norm_ppf(p)) - p).abs() < 1e-14);
        }
    }
}
