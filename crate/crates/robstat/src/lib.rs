//! Robust statistics: univariate location/scale, casewise and cellwise
//! robust covariance, robust regression, robust PCA and preprocessing.
//!
//! Estimators are generic over [`Real`] (`f32`/`f64`); the aliases below fix
//! the common double-precision instantiations.

pub mod cellwise;
pub mod covariance;
pub mod error;
pub mod kernel;
pub mod pca;
mod scalar;
pub mod preprocessing;
pub mod regression;
pub mod univariate;

pub use error::{Result, RobError};
pub use scalar::{as_f64, cst, Real};

pub type Matrix = nalgebra::DMatrix<f64>;
pub type Vector = nalgebra::DVector<f64>;
