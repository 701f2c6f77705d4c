use crate::error::{Result, RobError};
use crate::kernel::{median, weighted_median};
use crate::scalar::{cmp, cst, sorted, Real};
use crate::univariate::{UnivariateFit, UnivariateMethod};

pub const QN_CONSTANT: f64 = 2.219;

fn qn_rank(n: usize) -> usize {
    let h = n / 2 + 1;
    h * (h - 1) / 2
}

/// k-th smallest pairwise gap |x_i - x_j|, i < j, k = C(floor(n/2) + 1, 2),
/// by sorting all gaps.
pub fn qn_naive<T: Real>(x: &[T]) -> Result<T> {
    let n = x.len();
    if n < 2 {
        return Err(RobError::InvalidArgument(format!("Qn needs n >= 2, got {n}")));
    }
    let mut gaps = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            gaps.push((x[i] - x[j]).abs());
        }
    }
    gaps.sort_by(cmp);
    Ok(gaps[qn_rank(n) - 1])
}

/// Same order statistic as [`qn_naive`], selected in O(n log n) by repeatedly
/// splitting the implicit matrix of sorted differences at a weighted median.
pub fn qn_raw<T: Real>(x: &[T]) -> Result<T> {
    let n = x.len();
    if n < 2 {
        return Err(RobError::InvalidArgument(format!("Qn needs n >= 2, got {n}")));
    }
    // 1-based arrays: y[1..=n] ascending; cell (i, j) holds y[i] - y[n + 1 - j].
    let mut y = vec![T::zero(); n + 2];
    for (i, v) in sorted(x).into_iter().enumerate() {
        y[i + 1] = v;
    }
    let k = qn_rank(n);
    let mut left = vec![0usize; n + 2];
    let mut right = vec![0usize; n + 2];
    let mut p = vec![0usize; n + 2];
    let mut q = vec![0usize; n + 2];
    for i in 1..=n {
        left[i] = n - i + 2;
        right[i] = n;
    }
    let knew = k + n * (n + 1) / 2;
    let mut nl = n * (n + 1) / 2;
    let mut nr = n * n;
    let mut work: Vec<T> = Vec::with_capacity(n);
    let mut weight: Vec<T> = Vec::with_capacity(n);
    while nr - nl > n {
        work.clear();
        weight.clear();
        for i in 2..=n {
            if left[i] <= right[i] {
                let w = right[i] - left[i] + 1;
                let jh = left[i] + w / 2;
                work.push(y[i] - y[n + 1 - jh]);
                weight.push(cst(w as f64));
            }
        }
        let trial = weighted_median(&work, &weight)?;
        let mut j = 0usize;
        for i in (1..=n).rev() {
            while j < n && y[i] - y[n - j] < trial {
                j += 1;
            }
            p[i] = j;
        }
        let mut j = n + 1;
        for i in 1..=n {
            while y[i] - y[n + 2 - j] > trial {
                j -= 1;
            }
            q[i] = j;
        }
        let sum_p: usize = p[1..=n].iter().sum();
        let sum_q: usize = q[1..=n].iter().map(|&v| v - 1).sum();
        if knew <= sum_p {
            right[1..=n].copy_from_slice(&p[1..=n]);
            nr = sum_p;
        } else if knew > sum_q {
            left[1..=n].copy_from_slice(&q[1..=n]);
            nl = sum_q;
        } else {
            return Ok(trial);
        }
    }
    let mut rest = Vec::with_capacity(nr - nl);
    for i in 2..=n {
        for jj in left[i]..=right[i] {
            rest.push(y[i] - y[n + 1 - jj]);
        }
    }
    rest.sort_by(cmp);
    Ok(rest[knew - nl - 1])
}

/// Qn scale (2.219 times the raw order statistic); location is the median.
pub fn fit_qn<T: Real>(x: &[T]) -> Result<UnivariateFit<T>> {
    let raw = qn_raw(x)?;
    let scale = raw * cst(QN_CONSTANT);
    let mut fit = UnivariateFit::simple(median(x)?, scale, UnivariateMethod::Qn, true);
    fit.degenerate = scale == T::zero();
    Ok(fit)
}
