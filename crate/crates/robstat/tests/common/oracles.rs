//! Independent reference computations and equivariance checks shared by the
//! property tests and the acceptance runner.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use robstat::covariance::{fit_fast_mcd, mcd_h, McdOptions};
use robstat::kernel::median;
use robstat::pca::{pca_outlier_map_data, PcaFit};
use robstat::regression::{fit_fast_lts, LtsOptions, RegressionFit};

pub type Check = Result<(), String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn gauss_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Gaussian rows with a fifth of them shifted far away.
pub fn contaminated(seed: u64, n: usize, p: usize) -> DMatrix<f64> {
    let mut r = rng(seed);
    let mut x = gauss_matrix(&mut r, n, p);
    for i in 0..n / 5 {
        for j in 0..p {
            x[(i, j)] += 6.0 + 2.0 * j as f64;
        }
    }
    x
}

/// Well-conditioned random p x p matrix.
pub fn random_invertible(rng: &mut ChaCha8Rng, p: usize) -> DMatrix<f64> {
    loop {
        let a = gauss_matrix(rng, p, p) + DMatrix::identity(p, p) * 1.5;
        let sv = a.clone().svd(false, false).singular_values;
        if sv.min() > 0.3 && sv.max() / sv.min() < 20.0 {
            return a;
        }
    }
}

pub fn random_orthogonal(rng: &mut ChaCha8Rng, p: usize) -> DMatrix<f64> {
    gauss_matrix(rng, p, p).qr().q()
}

pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..=(n - (k - cur.len())) {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = vec![];
    rec(0, n, k, &mut vec![], &mut out);
    out
}

pub fn rows(x: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), x.ncols(), |i, j| x[(idx[i], j)])
}

/// det of the (n - 1)-normalized covariance.
pub fn cov_det(sub: &DMatrix<f64>) -> f64 {
    let n = sub.nrows() as f64;
    let mean = sub.row_mean();
    let mut c = sub.clone();
    for mut r in c.row_iter_mut() {
        r -= &mean;
    }
    ((c.transpose() * &c) / (n - 1.0)).determinant()
}

/// Residual sum of squares of least squares on the given rows.
pub fn rss(a: &DMatrix<f64>, y: &DVector<f64>, idx: &[usize]) -> f64 {
    let sa = rows(a, idx);
    let sy = DVector::from_iterator(idx.len(), idx.iter().map(|&i| y[i]));
    let beta = sa.clone().svd(true, true).solve(&sy, 1e-14).unwrap();
    (sy - sa * beta).norm_squared()
}

/// Kernel median over every pair of distinct observations on opposite sides
/// of the median; tied pairs at the median score by the order of appearance.
pub fn medcouple_brute(x: &[f64]) -> f64 {
    let m = median(x).unwrap();
    let tied: Vec<usize> = (0..x.len()).filter(|&i| x[i] == m).collect();
    let mut h = vec![];
    for i in 0..x.len() {
        for j in 0..x.len() {
            if i == j || x[i] < m || x[j] > m {
                continue;
            }
            if x[i] == m && x[j] == m {
                let a = tied.iter().position(|&t| t == i).unwrap() as i64;
                let b = tied.iter().position(|&t| t == j).unwrap() as i64;
                h.push((a - b).signum() as f64);
            } else {
                h.push(((x[i] - m) + (x[j] - m)) / (x[i] - x[j]));
            }
        }
    }
    median(&h).unwrap()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

pub fn mat_close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
    a.shape() == b.shape() && a.iter().zip(b.iter()).all(|(&u, &v)| close(u, v, tol))
}

pub fn vec_close(a: &DVector<f64>, b: &DVector<f64>, tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b.iter()).all(|(&u, &v)| close(u, v, tol))
}

/// Columns agree up to sign.
pub fn loadings_close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
    a.shape() == b.shape()
        && (0..a.ncols()).all(|j| {
            let s = a.column(j).dot(&b.column(j)).signum();
            (0..a.nrows()).all(|i| close(a[(i, j)], s * b[(i, j)], tol))
        })
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn mcd_matches_exhaustive(seed: u64, n: usize, p: usize, alpha: f64) -> Check {
    let x = contaminated(seed, n, p);
    let h = mcd_h(n, p, alpha);
    let best = subsets(n, h).iter().map(|s| cov_det(&rows(&x, s))).fold(f64::INFINITY, f64::min);
    let fit = fit_fast_mcd(&x, &McdOptions { alpha, seed, ..Default::default() }).map_err(|e| e.to_string())?;
    let got = fit.objective.unwrap();
    ensure((got - best).abs() <= 1e-9 * best, || format!("MCD n={n} p={p}: fast {got} vs exhaustive {best}"))
}

pub fn lts_matches_exhaustive(seed: u64, n: usize, p: usize, alpha: f64) -> Check {
    let mut r = rng(seed);
    let x = gauss_matrix(&mut r, n, p);
    let noise = gauss_vec(&mut r, n);
    let mut y = DVector::from_fn(n, |i, _| 1.0 + x.row(i).sum() + 0.3 * noise[i]);
    for i in 0..n / 4 {
        y[i] += 8.0;
    }
    let a = x.clone().insert_column(0, 1.0);
    let h = (alpha * n as f64 + 1e-9).floor() as usize;
    let best = subsets(n, h).iter().map(|s| rss(&a, &y, s)).fold(f64::INFINITY, f64::min);
    let fit = fit_fast_lts(&x, &y, &LtsOptions { alpha, seed, ..Default::default() }).map_err(|e| e.to_string())?;
    let got = fit.objective.unwrap();
    ensure((got - best).abs() <= 1e-9 * best.max(1e-12), || format!("LTS n={n} p={p}: fast {got} vs exhaustive {best}"))
}

/// X -> X A + b maps location to A' mu + b and scatter to A' S A.
pub fn mcd_equivariance(seed: u64) -> Check {
    let mut r = rng(seed ^ 0x9e37);
    let p = 2 + (seed % 3) as usize;
    let x = contaminated(seed, 40, p);
    let a = random_invertible(&mut r, p);
    let b = DVector::from_vec(gauss_vec(&mut r, p)) * 10.0;
    let mut xt = &x * &a;
    for mut row in xt.row_iter_mut() {
        row += b.transpose();
    }
    let opts = McdOptions { alpha: 0.75, seed, ..Default::default() };
    let f0 = fit_fast_mcd(&x, &opts).map_err(|e| e.to_string())?;
    let f1 = fit_fast_mcd(&xt, &opts).map_err(|e| e.to_string())?;
    ensure(f0.subset == f1.subset, || "h-subset changed".into())?;
    ensure(vec_close(&f1.location, &(a.transpose() * &f0.location + &b), 1e-6), || "location".into())?;
    ensure(mat_close(&f1.scatter, &(a.transpose() * &f0.scatter * &a), 1e-6), || "scatter".into())?;
    ensure(mat_close(&f1.raw_scatter, &(a.transpose() * &f0.raw_scatter * &a), 1e-6), || "raw scatter".into())?;
    let s = &f1.scatter;
    ensure((s - s.transpose()).amax() <= 1e-12 * s.amax(), || "scatter not symmetric".into())
}

/// y -> c y + X v + d and X -> X A + e map the slopes to A^-1 (c beta + v).
pub fn regression_equivariance<F>(seed: u64, fit: F) -> Check
where
    F: Fn(&DMatrix<f64>, &DVector<f64>, u64) -> robstat::Result<RegressionFit<f64>>,
{
    let mut r = rng(seed);
    let (n, p) = (40, 2 + (seed % 2) as usize);
    let x = gauss_matrix(&mut r, n, p);
    let noise = gauss_vec(&mut r, n);
    let mut y = DVector::from_fn(n, |i, _| 2.0 - x.row(i).sum() + 0.5 * noise[i]);
    for i in 0..6 {
        y[i] += 15.0;
    }
    let a = random_invertible(&mut r, p);
    let e = DVector::from_vec(gauss_vec(&mut r, p)) * 5.0;
    let v = DVector::from_vec(gauss_vec(&mut r, p));
    let c: f64 = r.random_range(0.2..5.0) * if r.random_bool(0.5) { -1.0 } else { 1.0 };
    let d: f64 = r.random_range(-20.0..20.0);
    let mut xt = &x * &a;
    for mut row in xt.row_iter_mut() {
        row += e.transpose();
    }
    let yt = &y * c + &x * &v + DVector::from_element(n, d);
    let f0 = fit(&x, &y, seed).map_err(|e| e.to_string())?;
    let f1 = fit(&xt, &yt, seed).map_err(|e| e.to_string())?;
    let beta = a.clone().try_inverse().unwrap() * (&f0.coefficients * c + &v);
    let b0 = c * f0.intercept + d - e.dot(&beta);
    ensure(vec_close(&f1.coefficients, &beta, 1e-6), || format!("coefficients {} vs {}", f1.coefficients, beta))?;
    ensure(close(f1.intercept, b0, 1e-6), || format!("intercept {} vs {b0}", f1.intercept))?;
    ensure(close(f1.residual_scale, c.abs() * f0.residual_scale, 1e-6), || "residual scale".into())
}

/// X -> X Q + b rotates center and loadings; eigenvalues and distances are unchanged.
pub fn pca_equivariance<F>(seed: u64, fit: F) -> Check
where
    F: Fn(&DMatrix<f64>) -> robstat::Result<PcaFit<f64>>,
{
    let mut r = rng(seed);
    let scales = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 2.0, 0.7, 0.3]));
    let mut x = gauss_matrix(&mut r, 50, 4) * scales;
    for i in 0..5 {
        x[(i, 3)] += 10.0;
    }
    let q = random_orthogonal(&mut r, 4);
    let b = DVector::from_vec(gauss_vec(&mut r, 4)) * 3.0;
    let mut xt = &x * &q;
    for mut row in xt.row_iter_mut() {
        row += b.transpose();
    }
    let f0 = fit(&x).map_err(|e| e.to_string())?;
    let f1 = fit(&xt).map_err(|e| e.to_string())?;
    ensure(vec_close(&f1.center, &(q.transpose() * &f0.center + &b), 1e-6), || "center".into())?;
    ensure(loadings_close(&f1.loadings, &(q.transpose() * &f0.loadings), 1e-6), || "loadings".into())?;
    ensure(vec_close(&f1.eigenvalues, &f0.eigenvalues, 1e-6), || "eigenvalues".into())?;
    let k = f1.loadings.ncols();
    let gram = f1.loadings.transpose() * &f1.loadings;
    ensure((gram - DMatrix::identity(k, k)).amax() < 1e-10, || "loadings not orthonormal".into())?;
    let m0 = pca_outlier_map_data(&f0, &x).map_err(|e| e.to_string())?;
    let m1 = pca_outlier_map_data(&f1, &xt).map_err(|e| e.to_string())?;
    ensure(vec_close(&m0.score_distances, &m1.score_distances, 1e-6), || "score distances".into())?;
    ensure(vec_close(&m0.orthogonal_distances, &m1.orthogonal_distances, 1e-6), || "orthogonal distances".into())?;
    ensure(m0.classes == m1.classes, || "classes".into())
}
