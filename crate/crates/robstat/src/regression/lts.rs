use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::mcd_consistency;
use crate::error::{Result, RobError};
use crate::kernel::chi2_cdf;
use crate::kernel::stream_rng;
use crate::regression::{design, leverage_model, ls_on_rows, validate, RegMethod, RegressionFit};
use crate::scalar::{as_f64, cmp, cst, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LtsOptions {
    /// h = floor(alpha n).
    pub alpha: f64,
    pub n_initial_subsets: usize,
    pub n_initial_c_steps: usize,
    pub n_best_subsets: usize,
    pub reweighting: bool,
    pub intercept: bool,
    pub seed: u64,
}

impl Default for LtsOptions {
    fn default() -> Self {
        LtsOptions {
            alpha: 0.5,
            n_initial_subsets: 500,
            n_initial_c_steps: 2,
            n_best_subsets: 10,
            reweighting: true,
            intercept: true,
            seed: 0,
        }
    }
}

/// Factor making sqrt(mean of the h smallest squared residuals) consistent
/// for sigma at the normal: sqrt(alpha / F_{chi2_3}(chi2_{1,alpha})).
pub fn lts_consistency(alpha: f64) -> f64 {
    mcd_consistency(alpha, 1).sqrt()
}

/// Same for the scale of residuals truncated at |r| <= k sigma.
fn truncated_consistency(k: f64) -> f64 {
    let k2 = k * k;
    (chi2_cdf(k2, 1.0) / chi2_cdf(k2, 3.0)).sqrt()
}

#[derive(Debug, Clone)]
struct Candidate<T: Real> {
    beta: DVector<T>,
    subset: Vec<usize>,
    crit: T,
}

fn trimmed<T: Real>(a: &DMatrix<T>, y: &DVector<T>, beta: &DVector<T>, h: usize) -> (Vec<usize>, T) {
    let r2: Vec<T> = (y - a * beta).iter().map(|&r| r * r).collect();
    let mut idx: Vec<usize> = (0..r2.len()).collect();
    if h < idx.len() {
        idx.select_nth_unstable_by(h, |&i, &j| cmp(&r2[i], &r2[j]).then(i.cmp(&j)));
        idx.truncate(h);
    }
    let crit = idx.iter().fold(T::zero(), |s, &i| s + r2[i]);
    idx.sort_unstable();
    (idx, crit)
}

/// Least squares on the current h-subset followed by re-selection of the h
/// smallest squared residuals.
fn c_step<T: Real>(a: &DMatrix<T>, y: &DVector<T>, c: &Candidate<T>, h: usize) -> Candidate<T> {
    match ls_on_rows(a, y, &c.subset) {
        Some(beta) => {
            let (subset, crit) = trimmed(a, y, &beta, h);
            Candidate { beta, subset, crit }
        }
        None => c.clone(),
    }
}

fn converge<T: Real>(a: &DMatrix<T>, y: &DVector<T>, mut c: Candidate<T>, h: usize) -> (Candidate<T>, bool) {
    for _ in 0..1000 {
        let next = c_step(a, y, &c, h);
        debug_assert!(
            as_f64(next.crit) <= as_f64(c.crit) * (1.0 + 1e-10) + 1e-300,
            "LTS C-step increased the criterion"
        );
        if next.subset == c.subset {
            return (next, true);
        }
        c = next;
    }
    (c, false)
}

fn elemental<T: Real>(a: &DMatrix<T>, y: &DVector<T>, h: usize, seed: u64, k: usize) -> Option<Candidate<T>> {
    let (n, q) = a.shape();
    let mut rng = stream_rng(seed, k as u64 + 1);
    for _ in 0..20 {
        let idx = sample(&mut rng, n, q).into_vec();
        if let Some(beta) = ls_on_rows(a, y, &idx) {
            let (subset, crit) = trimmed(a, y, &beta, h);
            return Some(Candidate { beta, subset, crit });
        }
    }
    None
}

/// FastLTS: elemental starts, regression C-steps, the best candidates
/// concentrated to convergence, then optional hard-rejection reweighting.
pub fn fit_fast_lts<T: Real>(x: &DMatrix<T>, y: &DVector<T>, opts: &LtsOptions) -> Result<RegressionFit<T>> {
    validate(x, y, opts.intercept)?;
    if !(0.5..=1.0).contains(&opts.alpha) {
        return Err(RobError::InvalidArgument(format!("alpha must lie in [0.5, 1], got {}", opts.alpha)));
    }
    let a = design(x, opts.intercept);
    let (n, q) = a.shape();
    let h = ((opts.alpha * n as f64) + 1e-9).floor() as usize;
    if h < q {
        return Err(RobError::InvalidArgument(format!("h = {h} is below the number of coefficients {q}")));
    }
    let (best, converged) = if h == n {
        let beta = ls_on_rows(&a, y, &(0..n).collect::<Vec<_>>()).ok_or(RobError::DegenerateDesign)?;
        let (subset, crit) = trimmed(&a, y, &beta, h);
        (Candidate { beta, subset, crit }, true)
    } else {
        let mut cands: Vec<Candidate<T>> = (0..opts.n_initial_subsets.max(1))
            .into_par_iter()
            .filter_map(|k| {
                let mut c = elemental(&a, y, h, opts.seed, k)?;
                for _ in 0..opts.n_initial_c_steps {
                    c = c_step(&a, y, &c, h);
                }
                Some(c)
            })
            .collect();
        if cands.is_empty() {
            return Err(RobError::DegenerateDesign);
        }
        let mut order: Vec<usize> = (0..cands.len()).collect();
        order.sort_by(|&i, &j| cmp(&cands[i].crit, &cands[j].crit).then(i.cmp(&j)));
        order.truncate(opts.n_best_subsets.max(1));
        let finalists: Vec<Candidate<T>> = order.iter().map(|&i| cands[i].clone()).collect();
        cands.clear();
        let done: Vec<(Candidate<T>, bool)> = finalists.into_par_iter().map(|c| converge(&a, y, c, h)).collect();
        let mut best = done[0].clone();
        for d in done.into_iter().skip(1) {
            if d.0.crit < best.0.crit {
                best = d;
            }
        }
        best
    };

    let raw_c = if h == n { 1.0 } else { lts_consistency(h as f64 / n as f64) };
    let raw_scale = (best.crit / cst::<T>(h as f64)).sqrt() * cst(raw_c);
    let yscale = y.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let exact = best.crit <= yscale * yscale * cst(1e-24 * h as f64);
    let mut beta = best.beta.clone();
    let mut scale = raw_scale;
    if opts.reweighting && !exact && h < n {
        let r = y - &a * &beta;
        let keep: Vec<usize> = (0..n).filter(|&i| (r[i] / raw_scale).abs() <= cst(2.5)).collect();
        if keep.len() > q {
            if let Some(b) = ls_on_rows(&a, y, &keep) {
                let r = y - &a * &b;
                let ss = keep.iter().fold(T::zero(), |s, &i| s + r[i] * r[i]);
                beta = b;
                scale = (ss / cst((keep.len() - q) as f64)).sqrt() * cst(truncated_consistency(2.5));
            }
        }
    }
    let mut fit = RegressionFit::assemble(&beta, opts.intercept, scale, RegMethod::FastLts);
    fit.h = Some(h);
    fit.alpha = Some(opts.alpha);
    fit.seed = Some(opts.seed);
    fit.objective = Some(best.crit);
    fit.converged = converged;
    fit.exact_fit = exact;
    fit.x_model = leverage_model(x);
    Ok(fit)
}
