use serde::{Deserialize, Serialize};

use crate::error::{Result, RobError};
use crate::kernel::{medcouple, quantile_type7};
use crate::scalar::{as_f64, cst, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotFences<T> {
    pub q1: T,
    pub q3: T,
    pub iqr: T,
    pub mc: T,
    pub lower: T,
    pub upper: T,
    pub outlier_flags: Vec<bool>,
}

/// Skewness-adjusted fences from quartiles and medcouple:
/// [q1 - 1.5 e^{-4 mc} iqr, q3 + 1.5 e^{3 mc} iqr] for mc >= 0, exponents (-3, 4) otherwise.
pub fn fences_from_summary<T: Real>(q1: T, q3: T, mc: T) -> (T, T) {
    let iqr = q3 - q1;
    let k: T = cst(1.5);
    let (a, b): (T, T) = if mc >= T::zero() { (cst(-4.0), cst(3.0)) } else { (cst(-3.0), cst(4.0)) };
    (q1 - k * (a * mc).exp() * iqr, q3 + k * (b * mc).exp() * iqr)
}

/// Adjusted boxplot with type-7 quartiles; flags points strictly outside the fences.
pub fn adjusted_boxplot_fences<T: Real>(x: &[T]) -> Result<BoxplotFences<T>> {
    if x.len() < 5 {
        return Err(RobError::InvalidArgument(format!("adjusted boxplot needs n >= 5, got {}", x.len())));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(RobError::Domain("non-finite value in sample".into()));
    }
    let mc = medcouple(x)?;
    let q1 = quantile_type7(x, 0.25)?;
    let q3 = quantile_type7(x, 0.75)?;
    let (lower, upper) = fences_from_summary(q1, q3, mc);
    debug_assert!(as_f64(mc).abs() <= 1.0);
    Ok(BoxplotFences {
        q1,
        q3,
        iqr: q3 - q1,
        mc,
        lower,
        upper,
        outlier_flags: x.iter().map(|&v| v < lower || v > upper).collect(),
    })
}
