use crate::error::{Result, RobError};
use crate::scalar::{cmp, cst, from_usize, sorted, Real};

pub const MAD_CONSISTENCY: f64 = 1.4833;

pub fn median<T: Real>(x: &[T]) -> Result<T> {
    if x.is_empty() {
        return Err(RobError::EmptySample);
    }
    Ok(median_sorted(&sorted(x)))
}

pub(crate) fn median_sorted<T: Real>(s: &[T]) -> T {
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / cst(2.0)
    }
}

/// Median absolute deviation, times 1.4833 when `consistent`.
pub fn mad<T: Real>(x: &[T], consistent: bool) -> Result<T> {
    let m = median(x)?;
    let dev: Vec<T> = x.iter().map(|&v| (v - m).abs()).collect();
    let raw = median(&dev)?;
    Ok(if consistent { raw * cst(MAD_CONSISTENCY) } else { raw })
}

/// Lower weighted median: smallest x_(k) whose cumulative sorted weight reaches half the total.
pub fn weighted_median<T: Real>(x: &[T], w: &[T]) -> Result<T> {
    if x.len() != w.len() {
        return Err(RobError::LengthMismatch(format!("{} values, {} weights", x.len(), w.len())));
    }
    if x.is_empty() {
        return Err(RobError::EmptySample);
    }
    if w.iter().any(|&v| !(v > T::zero())) {
        return Err(RobError::NonPositiveWeight);
    }
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| cmp(&x[a], &x[b]));
    let total = w.iter().fold(T::zero(), |a, &b| a + b);
    let half = total / cst(2.0);
    let mut acc = T::zero();
    for &i in &idx {
        acc += w[i];
        if acc >= half {
            return Ok(x[i]);
        }
    }
    Ok(x[idx[idx.len() - 1]])
}

pub fn mean<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |a, &b| a + b) / from_usize(x.len())
}

/// Variance with `ddof` degrees of freedom removed.
pub fn variance<T: Real>(x: &[T], ddof: usize) -> T {
    let m = mean(x);
    x.iter().fold(T::zero(), |a, &b| a + (b - m) * (b - m)) / from_usize(x.len() - ddof)
}

/// Linear-interpolation quantile (type 7).
pub fn quantile_type7<T: Real>(x: &[T], prob: f64) -> Result<T> {
    if x.is_empty() {
        return Err(RobError::EmptySample);
    }
    let s = sorted(x);
    Ok(quantile_sorted(&s, prob))
}

pub(crate) fn quantile_sorted<T: Real>(s: &[T], prob: f64) -> T {
    let h = (s.len() - 1) as f64 * prob;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(s.len() - 1);
    s[lo] + (s[hi] - s[lo]) * cst(h - lo as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_examples() {
        assert_eq!(median(&[1.0, 2.0, 3.0]).unwrap(), 2.0);
        assert_eq!(median(&[1.0, 2.0, 3.0, 4.0]).unwrap(), 2.5);
        assert_eq!(median(&[5.0]).unwrap(), 5.0);
        assert!(matches!(median::<f64>(&[]), Err(RobError::EmptySample)));
    }

    #[test]
    fn mad_examples() {
        let x = [1.0_f64, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(mad(&x, false).unwrap(), 1.0);
        assert!((mad(&x, true).unwrap() - 1.4833).abs() < 1e-12);
        assert_eq!(mad(&[2.0; 6], true).unwrap(), 0.0);
    }

    #[test]
    fn weighted_median_examples() {
        assert_eq!(weighted_median(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]).unwrap(), 2.0);
        assert_eq!(weighted_median(&[1.0, 2.0, 3.0], &[1.0, 1.0, 4.0]).unwrap(), 3.0);
        assert_eq!(weighted_median(&[7.0], &[0.5]).unwrap(), 7.0);
        assert!(weighted_median(&[1.0, 2.0], &[1.0]).is_err());
        assert!(matches!(weighted_median(&[1.0, 2.0], &[1.0, 0.0]), Err(RobError::NonPositiveWeight)));
    }

    #[test]
    fn type7_quartiles() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_type7(&x, 0.25).unwrap(), 2.0);
        assert_eq!(quantile_type7(&[1.0, 2.0, 3.0, 4.0], 0.25).unwrap(), 1.75);
    }

    #[test]
    fn works_in_single_precision() {
        assert_eq!(median(&[3.0f32, 1.0, 2.0]).unwrap(), 2.0f32);
        assert_eq!(mad(&[1.0f32, 2.0, 3.0, 4.0, 5.0], false).unwrap(), 1.0f32);
    }
}
