//! Casewise robust location and scatter.

mod detmcd;
mod kendall;
mod mcd;
mod ogk;
mod wrapping;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, RobError};
use crate::kernel::distr::{chi2_cdf, chi2_quantile_f};
use crate::kernel::linalg::{covariance, column_means};
use crate::kernel::mahalanobis_distances;
use crate::scalar::{cst, Real};

pub use detmcd::fit_det_mcd;
pub use kendall::{fit_kendall_tau_cov, kendall_tau_b};
pub use mcd::{fit_fast_mcd, mcd_h, McdOptions};
pub(crate) use mcd::closest;
pub use ogk::fit_ogk;
pub use wrapping::{fit_wrapping_cov, wrap_psi, WRAP_Q1, WRAP_Q2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovMethod {
    FastMcd,
    DetMcd,
    Ogk,
    KendallTau,
    Wrapping,
    Classical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationScatter<T: Real> {
    pub location: DVector<T>,
    pub scatter: DMatrix<T>,
    pub raw_location: DVector<T>,
    pub raw_scatter: DMatrix<T>,
    pub h: Option<usize>,
    pub alpha: Option<f64>,
    pub method: CovMethod,
    pub seed: Option<u64>,
    /// Consistency factors applied to the raw and reweighted scatter (1 when none).
    pub raw_consistency: f64,
    pub reweighted_consistency: f64,
    /// det of the unscaled covariance of the optimal h-subset (MCD methods).
    pub objective: Option<T>,
    /// Optimal h-subset, sorted (MCD methods).
    pub subset: Option<Vec<usize>>,
    /// Reweighting weights (MCD methods with reweighting).
    pub weights: Option<Vec<bool>>,
    /// Set when a near-singular covariance had to be floored along the way.
    pub eigen_floored: bool,
}

impl<T: Real> LocationScatter<T> {
    pub(crate) fn plain(location: DVector<T>, scatter: DMatrix<T>, method: CovMethod) -> Self {
        LocationScatter {
            raw_location: location.clone(),
            raw_scatter: scatter.clone(),
            location,
            scatter,
            h: None,
            alpha: None,
            method,
            seed: None,
            raw_consistency: 1.0,
            reweighted_consistency: 1.0,
            objective: None,
            subset: None,
            weights: None,
            eigen_floored: false,
        }
    }
}

/// Classical mean and (n - 1)-normalized covariance.
pub fn fit_classical<T: Real>(x: &DMatrix<T>) -> Result<LocationScatter<T>> {
    if x.nrows() < 2 {
        return Err(RobError::EmptySample);
    }
    Ok(LocationScatter::plain(column_means(x), covariance(x, 1), CovMethod::Classical))
}

/// Distances of the rows of `x` under the fit's final location and scatter.
pub fn robust_distances<T: Real>(fit: &LocationScatter<T>, x: &DMatrix<T>) -> Result<DVector<T>> {
    mahalanobis_distances(x, &fit.location, &fit.scatter)
}

/// alpha / F_{chi2_{p+2}}(chi2_{p, alpha}): makes an alpha-trimmed covariance consistent at the normal.
pub fn mcd_consistency(alpha: f64, p: usize) -> f64 {
    if alpha >= 1.0 {
        return 1.0;
    }
    let q = chi2_quantile_f(alpha, p as f64);
    alpha / chi2_cdf(q, p as f64 + 2.0)
}

/// sqrt(chi2_{p, prob}).
pub fn chi2_cutoff(p: usize, prob: f64) -> f64 {
    chi2_quantile_f(prob, p as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DDPlotData<T: Real> {
    pub classical_distances: DVector<T>,
    pub robust_distances: DVector<T>,
    pub cutoff: f64,
    pub flags: Vec<bool>,
}

/// Classical versus robust distances with the sqrt(chi2_{p,0.975}) cutoff.
pub fn distance_distance_data<T: Real>(fit: &LocationScatter<T>, x: &DMatrix<T>) -> Result<DDPlotData<T>> {
    let (n, p) = x.shape();
    if n <= p {
        return Err(RobError::InvalidArgument(format!("need n > p, got n={n}, p={p}")));
    }
    let md = mahalanobis_distances(x, &column_means(x), &covariance(x, 1))?;
    let rd = robust_distances(fit, x)?;
    let cutoff = chi2_cutoff(p, 0.975);
    let c: T = cst(cutoff);
    let flags = rd.iter().map(|&d| d > c).collect();
    Ok(DDPlotData { classical_distances: md, robust_distances: rd, cutoff, flags })
}

pub(crate) fn check_complete<T: Real>(x: &DMatrix<T>) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(RobError::Domain("data contain missing or non-finite values".into()));
    }
    Ok(())
}
