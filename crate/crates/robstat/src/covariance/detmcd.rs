use nalgebra::{DMatrix, DVector};

use crate::covariance::mcd::{c_step_converge, classical_fit, closest, finish_mcd, mcd_h, pick_best, validate_mcd_input, HSubset};
use crate::covariance::ogk::{column, ogk_with};
use crate::covariance::{CovMethod, LocationScatter};
use crate::error::{Result, RobError};
use crate::kernel::linalg::{covariance, select_rows, sqrt_spd, sym_eigen_desc};
use crate::kernel::{median, norm_ppf};
use crate::scalar::{as_f64, cmp, cst, from_usize, Real};
use crate::univariate::fit_qn;

fn qn<T: Real>(v: &[T]) -> Result<T> {
    Ok(fit_qn(v)?.scale)
}

fn correlation<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    let c = covariance(m, 1);
    let p = c.nrows();
    let sd: Vec<T> = (0..p).map(|j| c[(j, j)].sqrt()).collect();
    DMatrix::from_fn(p, p, |j, k| {
        if j == k {
            T::one()
        } else if sd[j] > T::zero() && sd[k] > T::zero() {
            c[(j, k)] / (sd[j] * sd[k])
        } else {
            T::zero()
        }
    })
}

/// Average ranks (1-based) per column.
fn ranks<T: Real>(z: &DMatrix<T>) -> DMatrix<T> {
    let (n, p) = z.shape();
    let mut r = DMatrix::zeros(n, p);
    for j in 0..p {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| cmp(&z[(a, j)], &z[(b, j)]));
        let mut i = 0;
        while i < n {
            let mut k = i;
            while k + 1 < n && z[(idx[k + 1], j)] == z[(idx[i], j)] {
                k += 1;
            }
            let avg: T = cst((i + k) as f64 / 2.0 + 1.0);
            for &t in &idx[i..=k] {
                r[(t, j)] = avg;
            }
            i = k + 1;
        }
    }
    r
}

/// The six deterministic starting scatter matrices on standardized data.
fn initial_scatters<T: Real>(z: &DMatrix<T>) -> Result<Vec<DMatrix<T>>> {
    let (n, p) = z.shape();
    let nf = n as f64;
    let s1 = correlation(&z.map(|v| v.tanh()));
    let r = ranks(z);
    let s2 = correlation(&r);
    let s3 = correlation(&r.map(|v| cst::<T>(norm_ppf((as_f64(v) - 1.0 / 3.0) / (nf + 1.0 / 3.0)))));
    let mut k = z.clone();
    for i in 0..n {
        let norm = k.row(i).norm();
        if norm > T::zero() {
            for j in 0..p {
                k[(i, j)] /= norm;
            }
        }
    }
    let s4 = k.transpose() * &k / from_usize::<T>(n);
    let norms: Vec<T> = (0..n).map(|i| z.row(i).norm()).collect();
    let s5 = covariance(&select_rows(z, &closest(&norms, n.div_ceil(2))), 1);
    let (_, s6) = ogk_with(z, |v| Ok((median(v)?, qn(v)?)))?;
    Ok(vec![s1, s2, s3, s4, s5, s6])
}

/// Turns a start scatter into a location/scatter pair with Qn eigenvalues and
/// returns the ceil(n/2) points closest under it.
fn start_subset<T: Real>(z: &DMatrix<T>, s: &DMatrix<T>) -> Result<Vec<usize>> {
    let (n, p) = z.shape();
    let (_, e) = sym_eigen_desc(s);
    let b = z * &e;
    let mut lam: Vec<T> = (0..p).map(|j| qn(&column(&b, j)).map(|q| q * q)).collect::<Result<_>>()?;
    let top = lam.iter().copied().fold(T::zero(), |a, v| if v > a { v } else { a });
    if !(top > T::zero()) {
        return Err(RobError::DegenerateScale);
    }
    for l in lam.iter_mut() {
        if *l < top * cst(1e-12) {
            *l = top * cst(1e-12);
        }
    }
    let cov = &e * DMatrix::from_diagonal(&DVector::from_vec(lam.clone())) * e.transpose();
    let (root, root_inv) = sqrt_spd(&cov);
    let w = z * &root_inv;
    let m = DVector::from_iterator(p, (0..p).map(|j| median(&column(&w, j))).collect::<Result<Vec<T>>>()?);
    let mu = root * m;
    let proj_mu = e.transpose() * &mu;
    let d: Vec<T> = (0..n)
        .map(|i| (0..p).fold(T::zero(), |acc, j| {
            let t = b[(i, j)] - proj_mu[j];
            acc + t * t / lam[j]
        }))
        .collect();
    Ok(closest(&d, n.div_ceil(2)))
}

/// Deterministic MCD: six robust starting scatters on median/Qn standardized
/// data, each concentrated to convergence; the lowest determinant wins.
pub fn fit_det_mcd<T: Real>(x: &DMatrix<T>, alpha: f64, reweighting: bool) -> Result<LocationScatter<T>> {
    validate_mcd_input(x, alpha)?;
    let (n, p) = x.shape();
    let h = mcd_h(n, p, alpha);
    if h == n {
        return classical_fit(x, alpha, CovMethod::DetMcd);
    }
    let mut loc = Vec::with_capacity(p);
    let mut sc = Vec::with_capacity(p);
    for j in 0..p {
        let c = column(x, j);
        let s = qn(&c)?;
        if !(s > T::zero()) {
            return Err(RobError::ZeroRobustScale(format!("column {j}")));
        }
        loc.push(median(&c)?);
        sc.push(s);
    }
    let z = DMatrix::from_fn(n, p, |i, j| (x[(i, j)] - loc[j]) / sc[j]);
    let mut cands = Vec::with_capacity(6);
    for s in initial_scatters(&z)? {
        let idx = match start_subset(&z, &s) {
            Ok(idx) => idx,
            Err(RobError::DegenerateScale) => continue,
            Err(e) => return Err(e),
        };
        let start = HSubset::new(x, idx).c_step(x, h);
        cands.push(c_step_converge(x, start, h, 1000));
    }
    if cands.is_empty() {
        return Err(RobError::DegenerateScale);
    }
    finish_mcd(x, pick_best(cands), h, alpha, reweighting, CovMethod::DetMcd, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn deterministic_and_close_to_truth() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let l = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.6, 0.8]);
        let g = DMatrix::<f64>::from_fn(500, 2, |_, _| StandardNormal.sample(&mut rng));
        let x = g * l.transpose();
        let truth = &l * l.transpose();
        let a = fit_det_mcd(&x, 0.75, true).unwrap();
        let b = fit_det_mcd(&x, 0.75, true).unwrap();
        assert_eq!(a, b);
        assert!((a.scatter - &truth).norm() < 0.1 * truth.norm());
    }

    #[test]
    fn average_ranks() {
        let z = DMatrix::from_column_slice(4, 1, &[3.0, 1.0, 3.0, 2.0]);
        assert_eq!(ranks(&z).as_slice(), &[3.5, 1.0, 3.5, 2.0]);
    }
}
