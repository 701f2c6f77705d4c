use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Result, RobError};
use crate::scalar::{cmp, cst, eps, from_usize, Real};

/// Distances sqrt((x_i - mu)' Sigma^-1 (x_i - mu)) through a Cholesky factor.
pub fn mahalanobis_distances<T: Real>(x: &DMatrix<T>, mu: &DVector<T>, sigma: &DMatrix<T>) -> Result<DVector<T>> {
    let p = sigma.nrows();
    if sigma.ncols() != p || mu.len() != p || x.ncols() != p {
        return Err(RobError::LengthMismatch(format!(
            "data has {} columns, location {}, scatter {}x{}",
            x.ncols(),
            mu.len(),
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    let l = cholesky_checked(sigma)?;
    let mut out = DVector::zeros(x.nrows());
    let mut diff = DVector::zeros(p);
    for i in 0..x.nrows() {
        for j in 0..p {
            diff[j] = x[(i, j)] - mu[j];
        }
        let y = l.solve_lower_triangular(&diff).ok_or(RobError::SingularScatter)?;
        out[i] = y.norm();
    }
    Ok(out)
}

/// Lower Cholesky factor, rejecting numerically singular matrices.
pub(crate) fn cholesky_checked<T: Real>(sigma: &DMatrix<T>) -> Result<DMatrix<T>> {
    let p = sigma.nrows();
    if p == 0 {
        return Err(RobError::SingularScatter);
    }
    let chol = sigma.clone().cholesky().ok_or(RobError::SingularScatter)?;
    let l = chol.l();
    let diag: Vec<f64> = (0..p).map(|i| crate::scalar::as_f64(l[(i, i)])).collect();
    let max = diag.iter().cloned().fold(0.0_f64, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let tol = (eps::<T>() * 1e2).sqrt();
    if !(min > 0.0) || min < tol * max {
        return Err(RobError::SingularScatter);
    }
    Ok(l)
}

/// Eigenpairs of a symmetric matrix, eigenvalues descending, each eigenvector
/// signed so that its largest-magnitude entry is positive.
pub fn sym_eigen_desc<T: Real>(m: &DMatrix<T>) -> (DVector<T>, DMatrix<T>) {
    let sym = (m + m.transpose()) * cst::<T>(0.5);
    let eig = SymmetricEigen::new(sym);
    let p = m.nrows();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| cmp(&eig.eigenvalues[b], &eig.eigenvalues[a]));
    let mut vals = DVector::zeros(p);
    let mut vecs = DMatrix::zeros(p, p);
    for (k, &j) in order.iter().enumerate() {
        vals[k] = eig.eigenvalues[j];
        let mut col = eig.eigenvectors.column(j).into_owned();
        let mut best = 0;
        for i in 1..p {
            if col[i].abs() > col[best].abs() + cst(1e-12) {
                best = i;
            }
        }
        if col[best] < T::zero() {
            col = -col;
        }
        vecs.set_column(k, &col);
    }
    (vals, vecs)
}

pub fn column_means<T: Real>(x: &DMatrix<T>) -> DVector<T> {
    let n: T = from_usize(x.nrows());
    DVector::from_iterator(x.ncols(), (0..x.ncols()).map(|j| x.column(j).sum() / n))
}

/// Sample covariance with `ddof` degrees of freedom removed.
pub fn covariance<T: Real>(x: &DMatrix<T>, ddof: usize) -> DMatrix<T> {
    let mu = column_means(x);
    covariance_about(x, &mu, ddof)
}

pub(crate) fn covariance_about<T: Real>(x: &DMatrix<T>, mu: &DVector<T>, ddof: usize) -> DMatrix<T> {
    let mut c = x.clone();
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            c[(i, j)] -= mu[j];
        }
    }
    let denom: T = from_usize(x.nrows().saturating_sub(ddof).max(1));
    let mut s = c.transpose() * &c / denom;
    symmetrize(&mut s);
    s
}

pub(crate) fn symmetrize<T: Real>(s: &mut DMatrix<T>) {
    let p = s.nrows();
    for i in 0..p {
        for j in (i + 1)..p {
            let v = (s[(i, j)] + s[(j, i)]) / cst(2.0);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
}

pub(crate) fn select_rows<T: Real>(x: &DMatrix<T>, rows: &[usize]) -> DMatrix<T> {
    DMatrix::from_fn(rows.len(), x.ncols(), |i, j| x[(rows[i], j)])
}

/// Least squares via SVD (of the QR factor for tall designs); `None` when
/// the design is rank deficient.
pub fn lstsq<T: Real>(a: &DMatrix<T>, y: &DVector<T>) -> Option<DVector<T>> {
    if a.nrows() < a.ncols() {
        return None;
    }
    if a.nrows() > 2 * a.ncols() {
        let qr = a.clone().qr();
        let qty = qr.q().transpose() * y;
        return lstsq_square(qr.r(), &qty, a.nrows());
    }
    lstsq_square(a.clone(), y, a.nrows())
}

fn lstsq_square<T: Real>(a: DMatrix<T>, y: &DVector<T>, n: usize) -> Option<DVector<T>> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(T::zero(), |m, v| if v > m { v } else { m });
    let tol = smax * cst(eps::<T>() * 1e3 * n.max(a.ncols()) as f64);
    if smax == T::zero() || svd.singular_values.iter().any(|&v| v <= tol) {
        return None;
    }
    svd.solve(y, T::zero()).ok()
}

/// Weighted least squares with nonnegative weights.
pub fn weighted_lstsq<T: Real>(a: &DMatrix<T>, y: &DVector<T>, w: &[T]) -> Option<DVector<T>> {
    let mut aw = a.clone();
    let mut yw = y.clone();
    for i in 0..a.nrows() {
        let s = w[i].sqrt();
        for j in 0..a.ncols() {
            aw[(i, j)] *= s;
        }
        yw[i] *= s;
    }
    lstsq(&aw, &yw)
}

/// Symmetric square root and its inverse from the eigendecomposition.
pub(crate) fn sqrt_spd<T: Real>(s: &DMatrix<T>) -> (DMatrix<T>, DMatrix<T>) {
    let (vals, vecs) = sym_eigen_desc(s);
    let floor = cst::<T>(1e-300);
    let d = DVector::from_iterator(vals.len(), vals.iter().map(|&v| if v > floor { v.sqrt() } else { floor.sqrt() }));
    let dinv = d.map(|v| T::one() / v);
    let root = &vecs * DMatrix::from_diagonal(&d) * vecs.transpose();
    let root_inv = &vecs * DMatrix::from_diagonal(&dinv) * vecs.transpose();
    (root, root_inv)
}

/// Replaces eigenvalues below `floor` and rebuilds the matrix.
pub(crate) fn floor_eigenvalues<T: Real>(s: &DMatrix<T>, floor: T) -> (DMatrix<T>, bool) {
    let (vals, vecs) = sym_eigen_desc(s);
    let mut changed = false;
    let d = DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&v| {
            if v < floor {
                changed = true;
                floor
            } else {
                v
            }
        }),
    );
    let mut out = &vecs * DMatrix::from_diagonal(&d) * vecs.transpose();
    symmetrize(&mut out);
    (out, changed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_reduction() {
        let x = DMatrix::from_row_slice(1, 2, &[3.0_f64, 4.0]);
        let d = mahalanobis_distances(&x, &DVector::zeros(2), &DMatrix::identity(2, 2)).unwrap();
        assert!((d[0] - 5.0).abs() < 1e-14);
    }

    #[test]
    fn center_has_zero_distance() {
        let mu = DVector::from_vec(vec![1.0, -2.0]);
        let x = DMatrix::from_row_slice(1, 2, &[1.0, -2.0]);
        let s = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        assert_eq!(mahalanobis_distances(&x, &mu, &s).unwrap()[0], 0.0);
    }

    #[test]
    fn axis_scaling() {
        let x = DMatrix::from_row_slice(1, 2, &[2.0_f64, 0.0]);
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0]));
        let d = mahalanobis_distances(&x, &DVector::zeros(2), &s).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn singular_scatter_rejected() {
        let x = DMatrix::from_row_slice(1, 2, &[2.0, 0.0]);
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(mahalanobis_distances(&x, &DVector::zeros(2), &s), Err(RobError::SingularScatter)));
    }

    #[test]
    fn eigen_sorted_descending() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 3.0]);
        let (v, e) = sym_eigen_desc(&s);
        assert_eq!(v[0], 3.0);
        assert_eq!(e[(1, 0)], 1.0);
    }

    #[test]
    fn lstsq_detects_rank_deficiency() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        assert!(lstsq(&a, &DVector::from_vec(vec![1.0, 2.0, 3.0])).is_none());
    }
}
