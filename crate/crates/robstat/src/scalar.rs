use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar accepted by every estimator (implemented for `f32` and `f64`).
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + std::fmt::Debug + 'static {}

impl<T> Real for T where T: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + std::fmt::Debug + 'static {}

#[inline]
pub fn cst<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("constant representable in scalar type")
}

#[inline]
pub fn as_f64<T: Real>(v: T) -> f64 {
    v.to_f64().expect("scalar converts to f64")
}

#[inline]
pub fn from_usize<T: Real>(v: usize) -> T {
    T::from_usize(v).expect("count representable in scalar type")
}

pub(crate) fn cmp<T: Real>(a: &T, b: &T) -> std::cmp::Ordering {
    a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal)
}

pub(crate) fn sorted<T: Real>(x: &[T]) -> Vec<T> {
    let mut v = x.to_vec();
    v.sort_by(cmp);
    v
}

/// Machine epsilon of the scalar type, as f64.
pub(crate) fn eps<T: Real>() -> f64 {
    as_f64(T::default_epsilon())
}
