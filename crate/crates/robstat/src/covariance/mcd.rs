use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{check_complete, chi2_cutoff, mcd_consistency, CovMethod, LocationScatter};
use crate::error::{Result, RobError};
use crate::kernel::linalg::{cholesky_checked, column_means, covariance, covariance_about, floor_eigenvalues, select_rows, sym_eigen_desc};
use crate::kernel::{mahalanobis_distances, stream_rng};
use crate::scalar::{as_f64, cmp, cst, from_usize, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McdOptions {
    /// h = max(floor(alpha n), floor((n + p + 1) / 2)).
    pub alpha: f64,
    pub n_initial_subsets: usize,
    pub n_initial_c_steps: usize,
    pub n_best_subsets: usize,
    pub reweighting: bool,
    pub seed: u64,
}

impl Default for McdOptions {
    fn default() -> Self {
        McdOptions {
            alpha: 0.5,
            n_initial_subsets: 500,
            n_initial_c_steps: 2,
            n_best_subsets: 10,
            reweighting: true,
            seed: 0,
        }
    }
}

pub fn mcd_h(n: usize, p: usize, alpha: f64) -> usize {
    (((alpha * n as f64) + 1e-9).floor() as usize).max((n + p + 1) / 2).min(n)
}

/// An h-subset with its mean, covariance and log-determinant.
#[derive(Debug, Clone)]
pub(crate) struct HSubset<T: Real> {
    pub indices: Vec<usize>,
    pub mean: DVector<T>,
    pub cov: DMatrix<T>,
    pub logdet: T,
    /// Covariance was singular and had its eigenvalues floored.
    pub floored: bool,
    chol: DMatrix<T>,
}

impl<T: Real> HSubset<T> {
    pub fn new(x: &DMatrix<T>, mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        let sub = select_rows(x, &indices);
        let mean = column_means(&sub);
        let cov = covariance_about(&sub, &mean, 1);
        let (chol, floored) = match cholesky_checked(&cov) {
            Ok(l) => (l, false),
            Err(_) => {
                let p = cov.nrows();
                let tr = cov.trace();
                let floor = if tr > T::zero() { tr * cst(1e-12) / from_usize(p) } else { cst(1e-300) };
                let (fixed, _) = floor_eigenvalues(&cov, floor);
                let l = fixed.cholesky().map(|c| c.l()).unwrap_or_else(|| DMatrix::identity(p, p) * floor.sqrt());
                (l, true)
            }
        };
        let logdet = (0..chol.nrows()).fold(T::zero(), |s, i| s + chol[(i, i)].ln()) * cst(2.0);
        HSubset { indices, mean, cov, logdet, floored, chol }
    }

    fn sq_distances(&self, x: &DMatrix<T>) -> Vec<T> {
        let p = x.ncols();
        let mut diff = DVector::zeros(p);
        (0..x.nrows())
            .map(|i| {
                for j in 0..p {
                    diff[j] = x[(i, j)] - self.mean[j];
                }
                match self.chol.solve_lower_triangular(&diff) {
                    Some(y) => y.norm_squared(),
                    None => T::max_value().unwrap_or_else(|| cst(f64::MAX)),
                }
            })
            .collect()
    }

    /// One concentration step: the h points closest under this subset's fit.
    pub fn c_step(&self, x: &DMatrix<T>, h: usize) -> Self {
        HSubset::new(x, closest(&self.sq_distances(x), h))
    }

    pub fn det(&self) -> T {
        if self.floored {
            T::zero()
        } else {
            self.logdet.exp()
        }
    }
}

/// Indices of the h smallest values (ties broken by index), in ascending order.
pub(crate) fn closest<T: Real>(d: &[T], h: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..d.len()).collect();
    if h < idx.len() {
        idx.select_nth_unstable_by(h, |&a, &b| cmp(&d[a], &d[b]).then(a.cmp(&b)));
        idx.truncate(h);
    }
    idx.sort_unstable();
    idx
}

/// C-steps until the subset repeats (or `max_iter` steps).
pub(crate) fn c_step_converge<T: Real>(x: &DMatrix<T>, mut s: HSubset<T>, h: usize, max_iter: usize) -> HSubset<T> {
    for _ in 0..max_iter {
        let next = s.c_step(x, h);
        debug_assert!(
            s.floored || next.floored || as_f64(next.logdet) <= as_f64(s.logdet) + 1e-8 * (1.0 + as_f64(s.logdet).abs()),
            "C-step increased the determinant"
        );
        if next.indices == s.indices {
            return next;
        }
        s = next;
    }
    s
}

/// Random (p + 1)-point start, grown by random points while its covariance is singular,
/// then expanded to the h closest points.
fn initial_subset<T: Real>(x: &DMatrix<T>, h: usize, seed: u64, k: usize) -> HSubset<T> {
    let (n, p) = x.shape();
    let mut rng = stream_rng(seed, k as u64 + 1);
    let mut idx: Vec<usize> = sample(&mut rng, n, (p + 1).min(n)).into_vec();
    let mut start = HSubset::new(x, idx.clone());
    while start.floored && idx.len() < n {
        let rest: Vec<usize> = (0..n).filter(|i| !idx.contains(i)).collect();
        idx.push(rest[rng.random_range(0..rest.len())]);
        start = HSubset::new(x, idx.clone());
    }
    start.c_step(x, h)
}

fn exact_fit<T: Real>(s: &HSubset<T>) -> RobError {
    let (vals, vecs) = sym_eigen_desc(&s.cov);
    let p = vals.len();
    let v = vecs.column(p - 1);
    let offset = v.dot(&s.mean);
    let mut plane: Vec<f64> = v.iter().map(|&c| as_f64(c)).collect();
    plane.push(as_f64(offset));
    RobError::ExactFit { hyperplane: Some(plane) }
}

/// Consistency factor, reweighting and packaging shared by FastMCD and DetMCD.
pub(crate) fn finish_mcd<T: Real>(
    x: &DMatrix<T>,
    best: HSubset<T>,
    h: usize,
    alpha: f64,
    reweighting: bool,
    method: CovMethod,
    seed: Option<u64>,
) -> Result<LocationScatter<T>> {
    let (n, p) = x.shape();
    if best.floored {
        return Err(exact_fit(&best));
    }
    let raw_c = mcd_consistency(h as f64 / n as f64, p);
    let raw_scatter = &best.cov * cst::<T>(raw_c);
    let mut fit = LocationScatter::plain(best.mean.clone(), raw_scatter, method);
    fit.h = Some(h);
    fit.alpha = Some(alpha);
    fit.seed = seed;
    fit.raw_consistency = raw_c;
    fit.objective = Some(best.det());
    fit.subset = Some(best.indices.clone());
    if reweighting {
        let d = mahalanobis_distances(x, &fit.raw_location, &fit.raw_scatter)?;
        let cut: T = cst(chi2_cutoff(p, 0.975));
        let w: Vec<bool> = d.iter().map(|&v| v <= cut).collect();
        let keep: Vec<usize> = (0..n).filter(|&i| w[i]).collect();
        if keep.len() > p {
            let sub = select_rows(x, &keep);
            let c = mcd_consistency(0.975, p);
            fit.location = column_means(&sub);
            fit.scatter = covariance(&sub, 1) * cst::<T>(c);
            fit.reweighted_consistency = c;
            fit.weights = Some(w);
        }
    }
    Ok(fit)
}

pub(crate) fn validate_mcd_input<T: Real>(x: &DMatrix<T>, alpha: f64) -> Result<()> {
    let (n, p) = x.shape();
    if !(0.5..=1.0).contains(&alpha) {
        return Err(RobError::InvalidArgument(format!("alpha must lie in [0.5, 1], got {alpha}")));
    }
    if p == 0 || n <= 2 * p {
        return Err(RobError::InvalidArgument(format!("MCD needs n > 2p, got n={n}, p={p}")));
    }
    check_complete(x)
}

pub(crate) fn classical_fit<T: Real>(x: &DMatrix<T>, alpha: f64, method: CovMethod) -> Result<LocationScatter<T>> {
    let n = x.nrows();
    let best = HSubset::new(x, (0..n).collect());
    if best.floored {
        return Err(exact_fit(&best));
    }
    let mut fit = LocationScatter::plain(best.mean.clone(), best.cov.clone(), method);
    fit.h = Some(n);
    fit.alpha = Some(alpha);
    fit.objective = Some(best.det());
    fit.subset = Some(best.indices);
    Ok(fit)
}

/// FastMCD: random (p + 1)-point starts, a few C-steps each, then the best
/// candidates concentrated to convergence. Each start draws from its own
/// stream of `seed`, so the result does not depend on the thread count.
pub fn fit_fast_mcd<T: Real>(x: &DMatrix<T>, opts: &McdOptions) -> Result<LocationScatter<T>> {
    validate_mcd_input(x, opts.alpha)?;
    let (n, p) = x.shape();
    let h = mcd_h(n, p, opts.alpha);
    if h == n {
        let mut fit = classical_fit(x, opts.alpha, CovMethod::FastMcd)?;
        fit.seed = Some(opts.seed);
        return Ok(fit);
    }
    let mut candidates: Vec<HSubset<T>> = (0..opts.n_initial_subsets.max(1))
        .into_par_iter()
        .map(|k| {
            let mut s = initial_subset(x, h, opts.seed, k);
            for _ in 0..opts.n_initial_c_steps {
                s = s.c_step(x, h);
            }
            s
        })
        .collect();
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| cmp(&candidates[a].logdet, &candidates[b].logdet).then(a.cmp(&b)));
    order.truncate(opts.n_best_subsets.max(1));
    let finalists: Vec<HSubset<T>> = order.iter().map(|&i| std::mem::replace(&mut candidates[i], HSubset::new(x, vec![0]))).collect();
    let converged: Vec<HSubset<T>> = finalists.into_par_iter().map(|s| c_step_converge(x, s, h, 1000)).collect();
    let best = pick_best(converged);
    finish_mcd(x, best, h, opts.alpha, opts.reweighting, CovMethod::FastMcd, Some(opts.seed))
}

/// Lowest log-determinant; earlier candidates win ties.
pub(crate) fn pick_best<T: Real>(cands: Vec<HSubset<T>>) -> HSubset<T> {
    let mut it = cands.into_iter();
    let mut best = it.next().expect("at least one candidate");
    for c in it {
        if c.logdet < best.logdet {
            best = c;
        }
    }
    best
}
