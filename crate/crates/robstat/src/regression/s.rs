use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RobError};
use crate::kernel::linalg::weighted_lstsq;
use crate::kernel::{median, stream_rng, LossFunction, LossKind};
use crate::regression::{design, leverage_model, ls_on_rows, validate, RegMethod, RegressionFit};
use crate::scalar::{as_f64, cst, Real};

/// Bisquare tuning giving breakdown 0.5 and normal consistency with b = 0.5.
pub const S_BISQUARE_C: f64 = 1.547645;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SOptions {
    pub loss: LossFunction,
    /// Right-hand side of the scale constraint mean(rho(r / s)) = b.
    pub b: f64,
    pub n_initial_subsets: usize,
    pub n_initial_steps: usize,
    pub n_best_subsets: usize,
    pub intercept: bool,
    pub seed: u64,
    pub max_iter: usize,
    /// Relative change of the scale that stops the refinement.
    pub tol: f64,
}

impl Default for SOptions {
    fn default() -> Self {
        SOptions {
            loss: LossFunction::bisquare(S_BISQUARE_C),
            b: 0.5,
            n_initial_subsets: 500,
            n_initial_steps: 2,
            n_best_subsets: 5,
            intercept: true,
            seed: 0,
            max_iter: 500,
            tol: 1e-7,
        }
    }
}

fn mean_rho(r: &[f64], loss: &LossFunction, s: f64) -> f64 {
    r.iter().map(|&v| loss.rho(v / s)).sum::<f64>() / r.len() as f64
}

/// mean(rho(r / s)) and minus its derivative in s.
fn rho_and_slope(r: &[f64], loss: &LossFunction, s: f64) -> (f64, f64) {
    let d = match loss.kind {
        LossKind::Huber => 1.0,
        LossKind::TukeyBisquare => 6.0 / (loss.tuning * loss.tuning),
    };
    let (mut g, mut h) = (0.0, 0.0);
    for &v in r {
        let u = v / s;
        g += loss.rho(u);
        h += u * d * loss.psi(u);
    }
    let n = r.len() as f64;
    (g / n, h / (n * s))
}

/// M-scale: the s solving mean(rho(r_i / s)) = b, to within 1e-12 on the
/// constraint. Zero when too many residuals vanish.
pub fn m_scale<T: Real>(r: &[T], loss: &LossFunction, b: f64) -> Result<T> {
    if r.is_empty() {
        return Err(RobError::EmptySample);
    }
    let r: Vec<f64> = r.iter().map(|&v| as_f64(v)).collect();
    let abs: Vec<f64> = r.iter().map(|v| v.abs()).collect();
    let nonzero = abs.iter().filter(|&&v| v > 0.0).count() as f64;
    if nonzero / (r.len() as f64) <= b {
        return Ok(T::zero());
    }
    let mut s = median(&abs)? / 0.6745;
    if !(s > 0.0) {
        s = abs.iter().sum::<f64>() / nonzero;
    }
    for _ in 0..5 {
        s *= (mean_rho(&r, loss, s) / b).sqrt();
    }
    for _ in 0..100 {
        let (g, slope) = rho_and_slope(&r, loss, s);
        if (g - b).abs() <= 1e-13 || !(slope > 0.0) {
            break;
        }
        let next = s + (g - b) / slope;
        let next = if next > 0.5 * s && next < 2.0 * s { next } else { s * (g / b).sqrt() };
        let done = ((next - s) / s).abs() < 1e-15;
        s = next;
        if done {
            break;
        }
    }
    if (mean_rho(&r, loss, s) - b).abs() > 1e-12 {
        let (mut lo, mut hi) = (s, s);
        while mean_rho(&r, loss, lo) < b {
            lo *= 0.5;
        }
        while mean_rho(&r, loss, hi) > b {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mean_rho(&r, loss, mid) > b {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo) <= 1e-15 * hi {
                break;
            }
        }
        s = 0.5 * (lo + hi);
    }
    Ok(cst(s))
}

#[derive(Debug, Clone)]
struct Cand<T: Real> {
    beta: DVector<T>,
    scale: T,
}

/// One reweighted least squares step at the current scale, then a new M-scale.
fn improve<T: Real>(a: &DMatrix<T>, y: &DVector<T>, c: &Cand<T>, o: &SOptions) -> Result<Cand<T>> {
    if !(c.scale > T::zero()) {
        return Ok(c.clone());
    }
    let r = y - a * &c.beta;
    let w: Vec<T> = r.iter().map(|&v| o.loss.weight(v / c.scale)).collect();
    let Some(beta) = weighted_lstsq(a, y, &w) else {
        return Ok(c.clone());
    };
    let r = y - a * &beta;
    let scale = m_scale(r.as_slice(), &o.loss, o.b)?;
    Ok(Cand { beta, scale })
}

fn start<T: Real>(a: &DMatrix<T>, y: &DVector<T>, o: &SOptions, k: usize) -> Option<Cand<T>> {
    let (n, q) = a.shape();
    let mut rng = stream_rng(o.seed, k as u64 + 1);
    for _ in 0..20 {
        let idx = sample(&mut rng, n, q).into_vec();
        if let Some(beta) = ls_on_rows(a, y, &idx) {
            let r = y - a * &beta;
            let scale = m_scale(r.as_slice(), &o.loss, o.b).ok()?;
            return Some(Cand { beta, scale });
        }
    }
    None
}

fn refine<T: Real>(a: &DMatrix<T>, y: &DVector<T>, mut c: Cand<T>, o: &SOptions) -> Result<(Cand<T>, bool)> {
    let mut best = c.clone();
    for _ in 0..o.max_iter {
        let next = improve(a, y, &c, o)?;
        let rel = if c.scale > T::zero() { as_f64((next.scale - c.scale).abs() / c.scale) } else { 0.0 };
        c = next;
        if c.scale < best.scale {
            best = c.clone();
        }
        if rel < o.tol {
            return Ok((best, true));
        }
    }
    Ok((best, false))
}

/// Solves the S-regression problem and returns (coefficients, scale, converged).
pub(crate) fn s_core<T: Real>(a: &DMatrix<T>, y: &DVector<T>, o: &SOptions) -> Result<(DVector<T>, T, bool)> {
    let starts: Vec<Cand<T>> = (0..o.n_initial_subsets.max(1))
        .into_par_iter()
        .map(|k| {
            let Some(mut c) = start(a, y, o, k) else { return Ok(None) };
            for _ in 0..o.n_initial_steps {
                c = improve(a, y, &c, o)?;
            }
            Ok(Some(c))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    if starts.is_empty() {
        return Err(RobError::DegenerateDesign);
    }
    let mut order: Vec<usize> = (0..starts.len()).collect();
    order.sort_by(|&i, &j| crate::scalar::cmp(&starts[i].scale, &starts[j].scale).then(i.cmp(&j)));
    order.truncate(o.n_best_subsets.max(1));
    let done: Vec<(Cand<T>, bool)> = order
        .par_iter()
        .map(|&i| refine(a, y, starts[i].clone(), o))
        .collect::<Result<Vec<_>>>()?;
    let mut best = done[0].clone();
    for d in done.into_iter().skip(1) {
        if d.0.scale < best.0.scale {
            best = d;
        }
    }
    let y_size = y.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let scale = if best.0.scale <= y_size * cst(1e-12) { T::zero() } else { best.0.scale };
    Ok((best.0.beta, scale, best.1))
}

/// FAST-S regression estimate.
pub fn fit_s_regression<T: Real>(x: &DMatrix<T>, y: &DVector<T>, o: &SOptions) -> Result<RegressionFit<T>> {
    validate(x, y, o.intercept)?;
    let a = design(x, o.intercept);
    let (beta, scale, converged) = s_core(&a, y, o)?;
    let mut fit = RegressionFit::assemble(&beta, o.intercept, scale, RegMethod::S);
    fit.converged = converged;
    fit.seed = Some(o.seed);
    fit.objective = Some(scale);
    fit.exact_fit = !(scale > T::zero());
    fit.x_model = leverage_model(x);
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::optim::normal_expectation;

    #[test]
    fn tuning_constant_gives_half() {
        let l = LossFunction::bisquare(S_BISQUARE_C);
        assert!((normal_expectation(|z| l.rho(z)) - 0.5).abs() < 1e-5);
    }

    #[test]
    fn m_scale_constraint() {
        let r: Vec<f64> = (0..57).map(|i| ((i * 7) as f64).sin() * (1.0 + i as f64 / 20.0)).collect();
        let l = LossFunction::bisquare(S_BISQUARE_C);
        let s = m_scale(&r, &l, 0.5).unwrap();
        assert!((mean_rho(&r, &l, s) - 0.5).abs() < 1e-12);
        let scaled: Vec<f64> = r.iter().map(|v| 3.0 * v).collect();
        assert!((m_scale(&scaled, &l, 0.5).unwrap() - 3.0 * s).abs() < 1e-10 * s);
    }

    #[test]
    fn mostly_zero_residuals() {
        let mut r = vec![0.0; 10];
        r[0] = 1.0;
        assert_eq!(m_scale(&r, &LossFunction::bisquare(S_BISQUARE_C), 0.5).unwrap(), 0.0);
    }
}
