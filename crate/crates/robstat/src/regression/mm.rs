use nalgebra::{DMatrix, DVector};

use crate::error::{Result, RobError};
use crate::kernel::linalg::weighted_lstsq;
use crate::kernel::optim::bisect;
use crate::kernel::optim::normal_expectation;
use crate::kernel::LossFunction;
use crate::regression::s::s_core;
use crate::regression::{design, leverage_model, validate, RegMethod, RegressionFit, SOptions};
use crate::scalar::{as_f64, cst, Real};

/// Bisquare tuning constant with the requested asymptotic efficiency at the
/// normal, (E psi')^2 / E psi^2 (4.685 for 0.95).
pub fn bisquare_efficiency_constant(efficiency: f64) -> Result<f64> {
    if !(0.3..0.9999).contains(&efficiency) {
        return Err(RobError::InvalidArgument(format!("efficiency must lie in [0.3, 0.9999), got {efficiency}")));
    }
    let eff = |c: f64| {
        let l = LossFunction::bisquare(c);
        let dpsi = normal_expectation(|z| {
            let u = z / c;
            if u.abs() < 1.0 {
                (1.0 - u * u) * (1.0 - 5.0 * u * u)
            } else {
                0.0
            }
        });
        let psi2 = normal_expectation(|z| {
            let p = l.psi(z);
            p * p
        });
        dpsi * dpsi / psi2 - efficiency
    };
    Ok(bisect(eff, 0.5, 30.0, 1e-10))
}

fn objective<T: Real>(r: &DVector<T>, loss: &LossFunction, s: T) -> f64 {
    r.iter().map(|&v| as_f64(loss.rho(v / s))).sum()
}

/// MM-regression: FAST-S for the scale, then bisquare IRLS at the given
/// normal efficiency started from the S coefficients.
pub fn fit_mm_regression<T: Real>(
    x: &DMatrix<T>,
    y: &DVector<T>,
    efficiency: f64,
    s_opts: &SOptions,
) -> Result<RegressionFit<T>> {
    validate(x, y, s_opts.intercept)?;
    let c = bisquare_efficiency_constant(efficiency)?;
    let a = design(x, s_opts.intercept);
    let (beta_s, scale, s_converged) = s_core(&a, y, s_opts)?;
    let mut fit_beta = beta_s.clone();
    let mut converged = s_converged;
    if scale > T::zero() {
        let loss = LossFunction::bisquare(c);
        let start_obj = objective(&(y - &a * &beta_s), &loss, scale);
        let floor: T = cst(1e-12);
        let mut beta = beta_s.clone();
        converged = false;
        for _ in 0..1000 {
            let r = y - &a * &beta;
            let w: Vec<T> = r.iter().map(|&v| loss.weight(v / scale).max(floor)).collect();
            let Some(next) = weighted_lstsq(&a, y, &w) else { break };
            let step = (&next - &beta).norm();
            let size = beta.norm();
            beta = next;
            if step <= cst::<T>(1e-8) * (T::one() + size) {
                converged = true;
                break;
            }
        }
        let end_obj = objective(&(y - &a * &beta), &loss, scale);
        debug_assert!(end_obj <= start_obj * (1.0 + 1e-9) + 1e-12, "MM objective increased");
        if end_obj <= start_obj * (1.0 + 1e-9) + 1e-12 {
            fit_beta = beta;
        }
    }
    let mut fit = RegressionFit::assemble(&fit_beta, s_opts.intercept, scale, RegMethod::Mm);
    fit.converged = converged;
    fit.seed = Some(s_opts.seed);
    fit.objective = Some(scale);
    fit.exact_fit = !(scale > T::zero());
    fit.x_model = leverage_model(x);
    Ok(fit)
}
