use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::covariance::{check_complete, closest, fit_fast_mcd, McdOptions};
use crate::error::{Result, RobError};
use crate::kernel::linalg::{column_means, covariance, select_rows, sym_eigen_desc};
use crate::kernel::{stahel_donoho, DirectionSampler};
use crate::pca::{od_cutoff, orthogonal_distances, sd_cutoff, Components, PcaFit, PcaMethod};
use crate::scalar::{as_f64, cst, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobpcaOptions {
    pub components: Components,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for RobpcaOptions {
    fn default() -> Self {
        RobpcaOptions { components: Components::default(), alpha: 0.75, seed: 0 }
    }
}

/// Centered data reduced to its affine span: (mean, basis p x r, coordinates n x r).
pub(crate) fn affine_span<T: Real>(x: &DMatrix<T>) -> Result<(DVector<T>, DMatrix<T>, DMatrix<T>)> {
    let (n, p) = x.shape();
    let mean = column_means(x);
    let mut xc = x.clone();
    for mut row in xc.row_iter_mut() {
        row -= mean.transpose();
    }
    let svd = xc.clone().svd(false, true);
    let vt = svd.v_t.ok_or(RobError::DegenerateDesign)?;
    let s = &svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| crate::scalar::cmp(&s[b], &s[a]).then(a.cmp(&b)));
    let smax = as_f64(s[order[0]]);
    let tol = smax * 1e-10 * n.max(p) as f64;
    let r = order.iter().filter(|&&i| as_f64(s[i]) > tol).count();
    if r == 0 {
        return Err(RobError::DegenerateDesign);
    }
    let basis = DMatrix::from_fn(p, r, |i, j| vt[(order[j], i)]);
    let coords = &xc * &basis;
    Ok((mean, basis, coords))
}

/// Flips each column so its largest-magnitude entry is positive.
pub(crate) fn orient<T: Real>(m: &mut DMatrix<T>) {
    for mut col in m.column_iter_mut() {
        let mut k = 0;
        for i in 0..col.len() {
            if col[i].abs() > col[k].abs() + cst(1e-12) {
                k = i;
            }
        }
        if col[k] < T::zero() {
            col.neg_mut();
        }
    }
}

/// ROBPCA: reduce to the affine span, keep the h least outlying points by
/// Stahel-Donoho outlyingness, project on the leading eigenvectors of their
/// covariance, then a reweighted MCD on the scores fixes center and axes.
pub fn fit_robpca<T: Real>(x: &DMatrix<T>, opts: &RobpcaOptions) -> Result<PcaFit<T>> {
    let n = x.nrows();
    if n < 10 {
        return Err(RobError::InvalidArgument(format!("ROBPCA needs at least 10 rows, got {n}")));
    }
    if !(0.5..=1.0).contains(&opts.alpha) {
        return Err(RobError::InvalidArgument(format!("alpha must lie in [0.5, 1], got {}", opts.alpha)));
    }
    check_complete(x)?;
    let (mean, basis, z) = affine_span(x)?;
    let r = basis.ncols();
    let h = (((opts.alpha * n as f64) + 1e-9).floor() as usize).max((n + r + 1) / 2).min(n);

    let outl = stahel_donoho(&z, &DirectionSampler::default_for(r, opts.seed))?;
    let keep = closest(outl.as_slice(), h);
    let sub = select_rows(&z, &keep);
    let mu_h = column_means(&sub);
    let (vals, vecs) = sym_eigen_desc(&covariance(&sub, 1));
    let vals: Vec<f64> = vals.iter().map(|&v| as_f64(v).max(0.0)).collect();
    let total: f64 = vals.iter().sum();
    if !(total > 0.0) {
        return Err(RobError::DegenerateDesign);
    }
    let cumulative: Vec<f64> = vals.iter().scan(0.0, |s, v| {
        *s += v;
        Some(*s / total)
    }).collect();
    let q = opts.components.choose(&cumulative, r)?;
    if 2 * q >= n {
        return Err(RobError::Infeasible(format!("{q} components need more than {} rows", 2 * q)));
    }

    let p_q = vecs.columns(0, q).into_owned();
    let mut t = z.clone();
    for mut row in t.row_iter_mut() {
        row -= mu_h.transpose();
    }
    let t = t * &p_q;
    let mcd = fit_fast_mcd(&t, &McdOptions { alpha: opts.alpha, seed: opts.seed, ..Default::default() })?;
    let (lam, e) = sym_eigen_desc(&mcd.scatter);
    let center = &mean + &basis * (&mu_h + &p_q * &mcd.location);
    let mut loadings = &basis * &p_q * e;
    orient(&mut loadings);
    let mut fit = PcaFit {
        center,
        loadings,
        eigenvalues: lam,
        explained_variance_ratio: cumulative[..q].to_vec(),
        method: PcaMethod::Robpca,
        sd_cutoff: sd_cutoff(q),
        od_cutoff: 0.0,
        seed: Some(opts.seed),
    };
    fit.od_cutoff = if q == r { 0.0 } else { od_cutoff(&orthogonal_distances(&fit, x)?) };
    Ok(fit)
}
