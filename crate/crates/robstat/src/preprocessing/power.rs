use serde::{Deserialize, Serialize};

use crate::error::{Result, RobError};
use crate::kernel::optim::minimize_bounded;
use crate::kernel::{chi2_quantile, mad, median, norm_ppf, LossFunction};
use crate::scalar::{as_f64, cst, sorted, Real};
use crate::univariate::fit_one_step_m;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerMethod {
    Auto,
    Boxcox,
    Yeojohnson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Fitted robust power transformation.
///
/// Forward: z = (g_lambda((x - pre_location) / pre_scale) - post_location) / post_scale.
/// Box-Cox fits use pre_location = 0 and pre_scale = median(x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTransform {
    pub method: PowerMethod,
    pub lambda_rew: f64,
    pub lambda_raw: f64,
    pub pre_location: f64,
    pub pre_scale: f64,
    pub post_location: f64,
    pub post_scale: f64,
}

/// Box-Cox (x^l - 1)/l, ln x at l = 0.
pub fn boxcox(x: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        x.ln()
    } else {
        (x.powf(lambda) - 1.0) / lambda
    }
}

pub fn boxcox_inverse(y: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        y.exp()
    } else {
        (y * lambda + 1.0).powf(1.0 / lambda)
    }
}

pub fn yeo_johnson(x: f64, lambda: f64) -> f64 {
    if x >= 0.0 {
        if lambda == 0.0 {
            x.ln_1p()
        } else {
            ((1.0 + x).powf(lambda) - 1.0) / lambda
        }
    } else if lambda == 2.0 {
        -(-x).ln_1p()
    } else {
        -((1.0 - x).powf(2.0 - lambda) - 1.0) / (2.0 - lambda)
    }
}

pub fn yeo_johnson_inverse(y: f64, lambda: f64) -> f64 {
    if y >= 0.0 {
        if lambda == 0.0 {
            y.exp_m1()
        } else {
            (lambda * y + 1.0).powf(1.0 / lambda) - 1.0
        }
    } else if lambda == 2.0 {
        -(-y).exp_m1()
    } else {
        1.0 - (1.0 + (lambda - 2.0) * y).powf(1.0 / (2.0 - lambda))
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Family {
    Boxcox,
    Yeojohnson,
}

impl Family {
    fn g(self, x: f64, l: f64) -> f64 {
        match self {
            Family::Boxcox => boxcox(x, l),
            Family::Yeojohnson => yeo_johnson(x, l),
        }
    }

    fn g_inv(self, y: f64, l: f64) -> f64 {
        match self {
            Family::Boxcox => boxcox_inverse(y, l),
            Family::Yeojohnson => yeo_johnson_inverse(y, l),
        }
    }

    /// Open bound of the transform's range: (lower, upper).
    fn range(self, l: f64) -> (Option<f64>, Option<f64>) {
        match self {
            Family::Boxcox if l > 0.0 => (Some(-1.0 / l), None),
            Family::Boxcox if l < 0.0 => (None, Some(-1.0 / l)),
            Family::Yeojohnson if l > 2.0 => (Some(1.0 / (2.0 - l)), None),
            Family::Yeojohnson if l < 0.0 => (None, Some(-1.0 / l)),
            _ => (None, None),
        }
    }

    /// Point beyond which the rectified transform continues linearly.
    fn changepoint(self, s: &[f64], l: f64) -> f64 {
        let n = s.len();
        let q = (n as f64 / 4.0).ceil() as usize;
        let (q1, q3) = (s[q - 1], s[n - q]);
        let eps = 1e-5;
        let mut c = if l < 1.0 { self.g(q3, l) * 1.5 } else { self.g(q1, l) * 1.5 };
        match self {
            Family::Boxcox => {
                if l < 0.0 {
                    c = c.min((1.0 / l).abs() - eps);
                } else if l > 0.0 {
                    c = c.max(-1.0 / l + eps);
                }
            }
            Family::Yeojohnson => {
                if l < 0.0 {
                    c = c.min((1.0 / l).abs() - eps);
                } else if l > 2.0 {
                    c = c.max(1.0 / (2.0 - l) + eps);
                }
            }
        }
        self.g_inv(c, l).max(s[0]).min(s[n - 1])
    }

    /// Transform that is linear (with matching slope) beyond the changepoint,
    /// past Q3 for l < 1 and below Q1 for l > 1.
    fn rectified(self, s: &[f64], l: f64) -> Vec<f64> {
        if l == 1.0 {
            return match self {
                Family::Boxcox => s.iter().map(|v| v - 1.0).collect(),
                Family::Yeojohnson => s.to_vec(),
            };
        }
        let c = self.changepoint(s, l);
        let gc = self.g(c, l);
        let slope = match self {
            Family::Boxcox => c.powf(l - 1.0),
            Family::Yeojohnson => {
                if l > 1.0 {
                    (1.0 + c.abs()).powf(1.0 - l)
                } else {
                    (1.0 + c.abs()).powf(l - 1.0)
                }
            }
        };
        s.iter()
            .map(|&v| {
                let linear = if l > 1.0 { v < c } else { v > c };
                if linear {
                    gc + (v - c) * slope
                } else {
                    self.g(v, l)
                }
            })
            .collect()
    }

    fn log_jacobian(self, x: f64) -> f64 {
        match self {
            Family::Boxcox => x.ln(),
            Family::Yeojohnson => x.signum() * x.abs().ln_1p(),
        }
    }
}

/// Huber one-step location and scale, falling back to (median, 1) on zero MAD.
fn huber_standardize(v: &[f64]) -> Vec<f64> {
    let (m, s) = match fit_one_step_m(v) {
        Ok(f) => (f.location, if f.scale > 0.0 { f.scale } else { 1.0 }),
        Err(_) => (median(v).unwrap_or(0.0), 1.0),
    };
    v.iter().map(|x| (x - m) / s).collect()
}

/// Robust normality criterion: bisquare(c = 0.5) distance between the sorted,
/// robustly standardized rectified transform and normal plotting positions.
fn robust_normality(family: Family, s: &[f64], l: f64, positions: &[f64]) -> f64 {
    let z = huber_standardize(&family.rectified(s, l));
    let rho = LossFunction::bisquare(0.5);
    z.iter().zip(positions).map(|(a, b)| rho.rho(a - b)).sum()
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    (m, var.sqrt())
}

fn max_likelihood(family: Family, x: &[f64], range: (f64, f64)) -> f64 {
    let n = x.len() as f64;
    let jac: f64 = x.iter().map(|&v| family.log_jacobian(v)).sum();
    minimize_bounded(
        |l| {
            let t: Vec<f64> = x.iter().map(|&v| family.g(v, l)).collect();
            let (_, sd) = mean_std(&t);
            n / 2.0 * (sd * sd).ln() - (l - 1.0) * jac
        },
        range.0,
        range.1,
        1e-5,
        500,
    )
}

struct FamilyFit {
    lambda_raw: f64,
    lambda: f64,
    post_location: f64,
    post_scale: f64,
}

fn fit_family(family: Family, s: &[f64]) -> FamilyFit {
    let n = s.len();
    let positions: Vec<f64> = (1..=n).map(|i| norm_ppf((i as f64 - 1.0 / 3.0) / (n as f64 + 1.0 / 3.0))).collect();
    let cut = chi2_quantile(0.99, 1).expect("valid quantile").sqrt();
    let mut range = (-4.0_f64, 6.0_f64);
    for widenings in 0.. {
        let lambda_raw = minimize_bounded(|l| robust_normality(family, s, l, &positions), range.0, range.1, 1e-5, 500);
        let mut z = huber_standardize(&family.rectified(s, lambda_raw));
        let mut lambda = lambda_raw;
        let mut moments = (0.0, 1.0);
        for _ in 0..2 {
            let keep: Vec<bool> = z.iter().map(|zi| zi.abs() <= cut).collect();
            let kept: Vec<f64> = s.iter().zip(&keep).filter(|(_, &k)| k).map(|(&v, _)| v).collect();
            lambda = max_likelihood(family, &kept, range);
            let xt: Vec<f64> = s.iter().map(|&v| family.g(v, lambda)).collect();
            let kept_t: Vec<f64> = xt.iter().zip(&keep).filter(|(_, &k)| k).map(|(&v, _)| v).collect();
            moments = mean_std(&kept_t);
            let (m, sd) = mean_std(&xt);
            z = xt.iter().map(|v| (v - m) / sd).collect();
        }
        let d_lo = (lambda - range.0).abs();
        let d_hi = (lambda - range.1).abs();
        if d_lo.min(d_hi) > 0.05 * (range.1 - range.0) || widenings == 8 {
            return FamilyFit { lambda_raw, lambda, post_location: moments.0, post_scale: moments.1 };
        }
        if d_lo <= d_hi {
            range.0 = 1.0 + (range.0 - 1.0) * 2.0;
        } else {
            range.1 = 1.0 + (range.1 - 1.0) * 2.0;
        }
    }
    unreachable!("loop returns by the last widening")
}

/// Robust power transform: the initial lambda minimizes a robust normality
/// criterion of a rectified transform, then two reweighted maximum-likelihood
/// steps keep points with |z| <= sqrt(chi2_1(0.99)).
pub fn fit_power_transform<T: Real>(x: &[T], method: PowerMethod) -> Result<PowerTransform> {
    let n = x.len();
    if n < 10 {
        return Err(RobError::InvalidArgument(format!("power transform needs n >= 10, got {n}")));
    }
    let v: Vec<f64> = x.iter().map(|&t| as_f64(t)).collect();
    if v.iter().any(|t| !t.is_finite()) {
        return Err(RobError::Domain("non-finite value in sample".into()));
    }
    let s = sorted(&v);
    if s[0] == s[n - 1] {
        return Err(RobError::DegenerateScale);
    }
    let positive = s[0] > 0.0;
    let method = match method {
        PowerMethod::Auto if positive => PowerMethod::Boxcox,
        PowerMethod::Auto => PowerMethod::Yeojohnson,
        PowerMethod::Boxcox if !positive => {
            return Err(RobError::Domain("Box-Cox requires strictly positive data".into()));
        }
        m => m,
    };
    let (family, pre_location, pre_scale) = match method {
        PowerMethod::Boxcox => (Family::Boxcox, 0.0, median(&s)?),
        _ => {
            let m = median(&s)?;
            let sc = mad(&s, true)?;
            if !(sc > 0.0) {
                return Err(RobError::DegenerateScale);
            }
            (Family::Yeojohnson, m, sc)
        }
    };
    let st: Vec<f64> = s.iter().map(|v| (v - pre_location) / pre_scale).collect();
    let fit = fit_family(family, &st);
    if !(fit.post_scale > 0.0) {
        return Err(RobError::DegenerateScale);
    }
    Ok(PowerTransform {
        method,
        lambda_rew: fit.lambda,
        lambda_raw: fit.lambda_raw,
        pre_location,
        pre_scale,
        post_location: fit.post_location,
        post_scale: fit.post_scale,
    })
}

/// Applies a fitted transform or its exact inverse.
pub fn apply_power_transform<T: Real>(t: &PowerTransform, x: &[T], direction: Direction) -> Result<Vec<T>> {
    let family = match t.method {
        PowerMethod::Boxcox => Family::Boxcox,
        PowerMethod::Yeojohnson => Family::Yeojohnson,
        PowerMethod::Auto => return Err(RobError::InvalidArgument("transform has no resolved method".into())),
    };
    let l = t.lambda_rew;
    x.iter()
        .map(|&xi| {
            let v = as_f64(xi);
            let out = match direction {
                Direction::Forward => {
                    let u = (v - t.pre_location) / t.pre_scale;
                    if family == Family::Boxcox && !(u > 0.0) {
                        return Err(RobError::Domain(format!("Box-Cox needs positive input, got {v}")));
                    }
                    (family.g(u, l) - t.post_location) / t.post_scale
                }
                Direction::Inverse => {
                    let y = v * t.post_scale + t.post_location;
                    let (lo, hi) = family.range(l);
                    if lo.is_some_and(|b| y <= b) || hi.is_some_and(|b| y >= b) {
                        return Err(RobError::Domain(format!("value {v} lies outside the transform's range")));
                    }
                    family.g_inv(y, l) * t.pre_scale + t.pre_location
                }
            };
            Ok(cst(out))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boxcox_log_of_e() {
        assert!((boxcox(std::f64::consts::E, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn yeo_johnson_identity_at_one() {
        for &v in &[-3.2, -0.1, 0.0, 0.4, 17.0] {
            assert!((yeo_johnson(v, 1.0) - v).abs() < 1e-14);
        }
    }

    #[test]
    fn elementary_inverses() {
        for &l in &[-2.0, -0.5, 0.0, 0.7, 1.0, 2.0, 3.5] {
            for &v in &[0.2, 1.0, 3.7] {
                assert!((boxcox_inverse(boxcox(v, l), l) - v).abs() < 1e-10);
            }
            for &v in &[-2.5, -0.3, 0.0, 0.6, 4.0] {
                assert!((yeo_johnson_inverse(yeo_johnson(v, l), l) - v).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rectified_is_continuous_at_changepoint() {
        let s: Vec<f64> = (1..=40).map(|i| (i as f64 / 7.0).exp()).collect();
        for &l in &[-1.0, 0.0, 0.5, 1.5] {
            let c = Family::Boxcox.changepoint(&s, l);
            let r = Family::Boxcox.rectified(&[c * (1.0 - 1e-10), c, c * (1.0 + 1e-10)], l);
            assert!((r[0] - r[2]).abs() < 1e-8 && (r[1] - boxcox(c, l)).abs() < 1e-12);
        }
    }

    #[test]
    fn boxcox_rejects_nonpositive() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 - 1.0).collect();
        assert!(fit_power_transform(&x, PowerMethod::Boxcox).is_err());
        assert_eq!(fit_power_transform(&x, PowerMethod::Auto).unwrap().method, PowerMethod::Yeojohnson);
    }

    #[test]
    fn constant_rejected() {
        assert!(fit_power_transform(&[3.0_f64; 12], PowerMethod::Auto).is_err());
    }
}
