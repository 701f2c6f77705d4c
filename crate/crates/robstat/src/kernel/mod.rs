//! Shared robust building blocks: order statistics, losses, distances,
//! spatial median, projection outlyingness and distribution helpers.

pub mod distr;
pub mod linalg;
mod loss;
mod medcouple;
pub mod optim;
mod spatial;
mod stats;

pub use distr::{chi2_cdf, chi2_quantile, norm_cdf, norm_pdf, norm_ppf, propagation_fraction};
pub use linalg::{covariance, column_means, lstsq, mahalanobis_distances, sym_eigen_desc, weighted_lstsq};
pub use loss::{loss_eval, LossEval, LossFunction, LossKind};
pub use medcouple::medcouple;
pub use spatial::{l1median, stahel_donoho, stream_rng, DirectionSampler};
pub use stats::{mad, mean, median, quantile_type7, variance, weighted_median, MAD_CONSISTENCY};
