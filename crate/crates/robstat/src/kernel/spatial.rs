use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RobError};
use crate::kernel::stats::median;
use crate::scalar::{as_f64, cst, Real};

/// Independent random stream `stream` derived from `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Spatial median by Weiszfeld iteration with the Vardi-Zhang step at data points.
pub fn l1median<T: Real>(x: &DMatrix<T>, tol: T, max_iter: usize) -> Result<DVector<T>> {
    let (n, p) = x.shape();
    if n == 0 {
        return Err(RobError::EmptySample);
    }
    let mut y = DVector::from_iterator(
        p,
        (0..p).map(|j| median(&x.column(j).iter().copied().collect::<Vec<_>>()).expect("nonempty column")),
    );
    let anchor: T = tol * cst(1e-3);
    for _ in 0..max_iter {
        let mut num = DVector::<T>::zeros(p);
        let mut den = T::zero();
        let mut pull = DVector::<T>::zeros(p);
        let mut ties = T::zero();
        for i in 0..n {
            let diff = DVector::from_iterator(p, (0..p).map(|j| x[(i, j)] - y[j]));
            let d = diff.norm();
            if d <= anchor {
                ties += T::one();
                continue;
            }
            let inv = T::one() / d;
            for j in 0..p {
                num[j] += x[(i, j)] * inv;
            }
            pull += &diff * inv;
            den += inv;
        }
        if den == T::zero() {
            return Ok(y);
        }
        let t = num / den;
        let next = if ties > T::zero() {
            let r = pull.norm();
            if r <= ties {
                y.clone()
            } else {
                let g = ties / r;
                &t * (T::one() - g) + &y * g
            }
        } else {
            t
        };
        let step = (&next - &y).norm();
        y = next;
        if step <= tol {
            return Ok(y);
        }
    }
    Err(RobError::NonConvergence {
        iterations: max_iter,
        last: y.iter().map(|&v| as_f64(v)).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionSampler {
    pub n_directions: usize,
    pub seed: u64,
}

impl DirectionSampler {
    /// 250 directions per dimension, at most 2500.
    pub fn default_for(p: usize, seed: u64) -> Self {
        DirectionSampler { n_directions: (250 * p).min(2500), seed }
    }

    /// Unit directions through pairs of distinct data points.
    pub fn directions<T: Real>(&self, x: &DMatrix<T>) -> Vec<DVector<T>> {
        let (n, p) = x.shape();
        let mut rng = stream_rng(self.seed, 0);
        let mut out = Vec::with_capacity(self.n_directions);
        if n < 2 {
            return out;
        }
        let mut attempts = 0usize;
        while out.len() < self.n_directions && attempts < 50 * self.n_directions.max(1) {
            attempts += 1;
            let pair = sample(&mut rng, n, 2);
            let (a, b) = (pair.index(0), pair.index(1));
            let d = DVector::from_iterator(p, (0..p).map(|j| x[(a, j)] - x[(b, j)]));
            let norm = d.norm();
            if norm > T::zero() {
                out.push(d / norm);
            }
        }
        out
    }
}

/// Stahel-Donoho outlyingness over sampled directions (raw median/MAD standardization).
pub fn stahel_donoho<T: Real>(x: &DMatrix<T>, sampler: &DirectionSampler) -> Result<DVector<T>> {
    let (n, p) = x.shape();
    if n <= p && p > 1 {
        return Err(RobError::InvalidArgument(format!("need n > p, got n={n}, p={p}")));
    }
    let dirs = sampler.directions(x);
    let per_dir: Vec<Option<Vec<T>>> = dirs
        .par_iter()
        .map(|a| {
            let proj: Vec<T> = (0..n).map(|i| (0..p).fold(T::zero(), |s, j| s + x[(i, j)] * a[j])).collect();
            let m = median(&proj).ok()?;
            let dev: Vec<T> = proj.iter().map(|&v| (v - m).abs()).collect();
            let s = median(&dev).ok()?;
            let spread = proj.iter().fold(T::zero(), |acc, &v| if v.abs() > acc { v.abs() } else { acc });
            if !(s > spread * cst(1e-12)) || s == T::zero() {
                return None;
            }
            Some(dev.iter().map(|&d| d / s).collect())
        })
        .collect();
    let mut out = DVector::from_element(n, T::zero());
    let mut any = false;
    for o in per_dir.into_iter().flatten() {
        any = true;
        for i in 0..n {
            if o[i] > out[i] {
                out[i] = o[i];
            }
        }
    }
    if !any {
        return Err(RobError::DirectionallyDegenerate);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l1median_one_dimension_is_median() {
        let x = DMatrix::from_column_slice(6, 1, &[0.0_f64, 1.0, 2.0, 10.0, 3.5, -4.0]);
        let m = l1median(&x, 1e-10, 1000).unwrap();
        assert!((m[0] - 1.5).abs() < 1e-9);
    }

    #[test]
    fn l1median_square_center() {
        let x = DMatrix::from_row_slice(4, 2, &[0.0_f64, 0.0, 2.0, 0.0, 0.0, 2.0, 2.0, 2.0]);
        let m = l1median(&x, 1e-10, 1000).unwrap();
        assert!((m[0] - 1.0).abs() < 1e-9 && (m[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn l1median_non_convergence_reports_iterate() {
        let x = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 5.0, 1.0, 1.0, 7.0]);
        match l1median(&x, 1e-300, 1) {
            Err(RobError::NonConvergence { last, .. }) => assert_eq!(last.len(), 2),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn sdo_one_dimension_is_standardized_distance() {
        let v = [1.0_f64, 2.0, 4.0, 7.0, 11.0, 3.0];
        let x = DMatrix::from_column_slice(6, 1, &v);
        let o = stahel_donoho(&x, &DirectionSampler { n_directions: 20, seed: 3 }).unwrap();
        let m = median(&v).unwrap();
        let s = crate::kernel::stats::mad(&v, false).unwrap();
        for i in 0..6 {
            assert!((o[i] - (v[i] - m).abs() / s).abs() < 1e-12);
        }
    }

    #[test]
    fn directions_are_unit_and_reproducible() {
        let x = DMatrix::from_fn(30, 3, |i, j| ((i * 7 + j * 13) % 11) as f64);
        let s = DirectionSampler { n_directions: 40, seed: 9 };
        let a = s.directions(&x);
        let b = s.directions(&x);
        assert_eq!(a, b);
        assert!(a.iter().all(|d| (d.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn sdo_degenerate_data_errors() {
        let x = DMatrix::from_element(10, 2, 1.0);
        assert!(matches!(
            stahel_donoho(&x, &DirectionSampler { n_directions: 5, seed: 0 }),
            Err(RobError::DirectionallyDegenerate)
        ));
    }
}
