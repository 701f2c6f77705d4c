use nalgebra::{DMatrix, DVector};

use crate::covariance::{check_complete, CovMethod, LocationScatter};
use crate::error::{Result, RobError};
use crate::kernel::linalg::sym_eigen_desc;
use crate::scalar::Real;
use crate::univariate::fit_tau;

pub(crate) fn column<T: Real>(x: &DMatrix<T>, j: usize) -> Vec<T> {
    x.column(j).iter().copied().collect()
}

/// Orthogonalized Gnanadesikan-Kettenring estimate with a pluggable
/// univariate (location, scale) pair.
pub(crate) fn ogk_with<T: Real, F>(x: &DMatrix<T>, est: F) -> Result<(DVector<T>, DMatrix<T>)>
where
    F: Fn(&[T]) -> Result<(T, T)>,
{
    let (n, p) = x.shape();
    if n < 2 || p == 0 {
        return Err(RobError::EmptySample);
    }
    let mut d = DVector::zeros(p);
    for j in 0..p {
        let (_, s) = est(&column(x, j))?;
        if !(s > T::zero()) {
            return Err(RobError::ZeroRobustScale(format!("column {j}")));
        }
        d[j] = s;
    }
    let y = DMatrix::from_fn(n, p, |i, j| x[(i, j)] / d[j]);
    let quarter = T::one() / (T::one() + T::one() + T::one() + T::one());
    let mut u = DMatrix::identity(p, p);
    for j in 0..p {
        for k in (j + 1)..p {
            let plus: Vec<T> = (0..n).map(|i| y[(i, j)] + y[(i, k)]).collect();
            let minus: Vec<T> = (0..n).map(|i| y[(i, j)] - y[(i, k)]).collect();
            let (_, sp) = est(&plus)?;
            let (_, sm) = est(&minus)?;
            let v = (sp * sp - sm * sm) * quarter;
            u[(j, k)] = v;
            u[(k, j)] = v;
        }
    }
    let (_, e) = sym_eigen_desc(&u);
    let z = &y * &e;
    let mut m = DVector::zeros(p);
    let mut lam = DVector::zeros(p);
    for j in 0..p {
        let (loc, s) = est(&column(&z, j))?;
        m[j] = loc;
        lam[j] = s * s;
    }
    let dm = DMatrix::from_diagonal(&d);
    let de = &dm * &e;
    let mut scatter = &de * DMatrix::from_diagonal(&lam) * de.transpose();
    crate::kernel::linalg::symmetrize(&mut scatter);
    Ok((&de * m, scatter))
}

/// OGK with tau scales and locations (c1 = 4.5, c2 = 3), no reweighting.
pub fn fit_ogk<T: Real>(x: &DMatrix<T>) -> Result<LocationScatter<T>> {
    check_complete(x)?;
    let (loc, scatter) = ogk_with(x, |v| {
        let f = fit_tau(v, 4.5, 3.0, true)?;
        Ok((f.location, f.scale))
    })?;
    Ok(LocationScatter::plain(loc, scatter, CovMethod::Ogk))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn gauss(n: usize, p: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, p, |_, _| StandardNormal.sample(&mut rng))
    }

    #[test]
    fn identity_for_independent_columns() {
        let f = fit_ogk(&gauss(4000, 3, 1)).unwrap();
        assert!((f.scatter - DMatrix::<f64>::identity(3, 3)).norm() < 0.1 * 3f64.sqrt());
    }

    #[test]
    fn column_permutation() {
        let x = gauss(200, 3, 2);
        let perm = [2, 0, 1];
        let xp = DMatrix::from_fn(200, 3, |i, j| x[(i, perm[j])]);
        let a = fit_ogk(&x).unwrap();
        let b = fit_ogk(&xp).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                assert!((b.scatter[(j, k)] - a.scatter[(perm[j], perm[k])]).abs() < 1e-8);
            }
        }
    }
}
