use nalgebra::{DMatrix, DVector};

use crate::covariance::check_complete;
use crate::error::{Result, RobError};
use crate::kernel::l1median;
use crate::kernel::linalg::sym_eigen_desc;
use crate::pca::robpca::orient;
use crate::pca::{od_cutoff, orthogonal_distances, sd_cutoff, Components, PcaFit, PcaMethod};
use crate::scalar::{as_f64, cmp, cst, from_usize, Real};
use crate::univariate::fit_univariate_mcd;

/// (1/(n-1)) sum of u u' / |u|^2 with u = x_i - center; rows at the center
/// are left out of the sum. Returns the matrix and the number of rows used.
pub fn spherical_matrix<T: Real>(x: &DMatrix<T>, center: &DVector<T>) -> (DMatrix<T>, usize) {
    let (n, p) = x.shape();
    let mut m = DMatrix::zeros(p, p);
    let mut used = 0;
    for i in 0..n {
        let u = DVector::from_fn(p, |j, _| x[(i, j)] - center[j]);
        let nrm2 = u.norm_squared();
        if nrm2 > T::zero() {
            m += &u * u.transpose() / nrm2;
            used += 1;
        }
    }
    (m / from_usize::<T>(n - 1), used)
}

/// Spherical PCA around the spatial median; component variances are the
/// squared univariate MCD scales of the scores.
pub fn fit_spherical_pca<T: Real>(x: &DMatrix<T>, components: Components) -> Result<PcaFit<T>> {
    let (n, p) = x.shape();
    if n < 10 {
        return Err(RobError::InvalidArgument(format!("spherical PCA needs at least 10 rows, got {n}")));
    }
    check_complete(x)?;
    let spread = x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let center = l1median(x, spread * cst(1e-12) + cst(1e-300), 1000)?;
    let (m, _) = spherical_matrix(x, &center);
    let (_, vecs) = sym_eigen_desc(&m);
    let mut xc = x.clone();
    for mut row in xc.row_iter_mut() {
        row -= center.transpose();
    }
    let t = &xc * &vecs;
    let mut var = Vec::with_capacity(p);
    for j in 0..p {
        let col: Vec<T> = t.column(j).iter().copied().collect();
        let f = fit_univariate_mcd(&col, 0.75, true, true)?;
        var.push(f.scale * f.scale);
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| cmp(&var[b], &var[a]).then(a.cmp(&b)));
    let total: f64 = var.iter().map(|&v| as_f64(v)).sum();
    if !(total > 0.0) {
        return Err(RobError::DegenerateDesign);
    }
    let cumulative: Vec<f64> = order
        .iter()
        .scan(0.0, |s, &j| {
            *s += as_f64(var[j]);
            Some(*s / total)
        })
        .collect();
    let rank = var.iter().filter(|&&v| as_f64(v) > 0.0).count().max(1);
    let q = components.choose(&cumulative, rank)?;
    let mut loadings = DMatrix::from_fn(p, q, |i, k| vecs[(i, order[k])]);
    orient(&mut loadings);
    let eigenvalues = DVector::from_fn(q, |k, _| var[order[k]]);
    let mut fit = PcaFit {
        center,
        loadings,
        eigenvalues,
        explained_variance_ratio: cumulative[..q].to_vec(),
        method: PcaMethod::Spherical,
        sd_cutoff: sd_cutoff(q),
        od_cutoff: 0.0,
        seed: None,
    };
    fit.od_cutoff = if q == p { 0.0 } else { od_cutoff(&orthogonal_distances(&fit, x)?) };
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_is_n_over_n_minus_one() {
        let x = DMatrix::from_fn(25, 3, |i, j| ((i * 5 + j * 11) as f64 * 0.29).cos() + j as f64);
        let c = DVector::from_vec(vec![0.1, 0.9, 2.2]);
        let (m, used) = spherical_matrix(&x, &c);
        assert_eq!(used, 25);
        assert!((m.trace() - 25.0 / 24.0).abs() < 1e-14);
        assert!((&m - m.transpose()).norm() < 1e-15);
    }

    #[test]
    fn collinear_direction() {
        let x = DMatrix::from_fn(30, 2, |i, j| (i as f64 - 12.0) * if j == 0 { 0.6 } else { 0.8 });
        let fit = fit_spherical_pca(&x, Components::Fixed(1)).unwrap();
        assert!((fit.loadings[(0, 0)].abs() - 0.6).abs() < 1e-8);
        assert!((fit.loadings[(1, 0)].abs() - 0.8).abs() < 1e-8);
    }
}
