use crate::error::{Result, RobError};
use crate::kernel::stats::median_sorted;
use crate::scalar::{cmp, Real};

/// Medcouple by the O(n^2) kernel-median definition.
///
/// Pairs of the same observation are excluded. Among k observations tied at
/// the median, the pair with tie positions (a, b) scores sign(a + b - (k - 1)),
/// so the scores of tied pairs cancel symmetrically.
pub fn medcouple<T: Real>(x: &[T]) -> Result<T> {
    if x.len() < 3 {
        return Err(RobError::InvalidArgument("medcouple needs at least 3 points".into()));
    }
    let mut s = x.to_vec();
    s.sort_by(|a, b| cmp(b, a));
    if s[0] == s[s.len() - 1] {
        return Err(RobError::DegenerateMedcouple);
    }
    let m = {
        let mut asc = s.clone();
        asc.reverse();
        median_sorted(&asc)
    };
    let z: Vec<T> = s.iter().map(|&v| v - m).collect();
    let plus: Vec<T> = z.iter().copied().filter(|&v| v >= T::zero()).collect();
    let minus: Vec<T> = z.iter().copied().filter(|&v| v <= T::zero()).collect();
    let k = z.iter().filter(|&&v| v == T::zero()).count() as i64;
    let n_pos_strict = plus.len() as i64 - k;
    let mut h = Vec::with_capacity(plus.len() * minus.len());
    for (i, &zp) in plus.iter().enumerate() {
        for (j, &zm) in minus.iter().enumerate() {
            if zp == T::zero() && zm == T::zero() {
                let a = i as i64 - n_pos_strict;
                let b = j as i64;
                let s = a + b - (k - 1);
                if s == 0 {
                    continue;
                }
                h.push(if s > 0 { T::one() } else { -T::one() });
            } else {
                h.push((zp + zm) / (zp - zm));
            }
        }
    }
    if h.is_empty() {
        return Err(RobError::DegenerateMedcouple);
    }
    h.sort_by(cmp);
    Ok(median_sorted(&h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_sample_is_zero() {
        assert_eq!(medcouple(&[-3.0, -1.0, 0.0, 1.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn skewed_example() {
        let mc = medcouple(&[1.0_f64, 2.0, 3.0, 4.0, 10.0]).unwrap();
        assert!((mc - 5.0 / 18.0).abs() < 1e-14);
    }

    #[test]
    fn antisymmetric() {
        let x = [1.0, 2.0, 3.0, 4.0, 10.0, 2.5];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((medcouple(&x).unwrap() + medcouple(&neg).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn constant_sample_is_degenerate() {
        assert!(matches!(medcouple(&[2.0; 5]), Err(RobError::DegenerateMedcouple)));
    }
}
