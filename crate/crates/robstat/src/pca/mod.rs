//! Robust principal components and the score/orthogonal distance map.

mod robpca;
mod spherical;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::covariance::chi2_cutoff;
use crate::error::{Result, RobError};
use crate::kernel::norm_ppf;
use crate::scalar::{as_f64, cst, Real};
use crate::univariate::fit_univariate_mcd;

pub use robpca::{fit_robpca, RobpcaOptions};
pub use spherical::{fit_spherical_pca, spherical_matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PcaMethod {
    Robpca,
    Spherical,
}

/// How many components to keep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Components {
    Fixed(usize),
    /// Smallest q whose cumulative explained variance reaches the fraction.
    MinExplained(f64),
}

impl Default for Components {
    fn default() -> Self {
        Components::MinExplained(0.8)
    }
}

impl Components {
    pub(crate) fn choose(&self, cumulative: &[f64], rank: usize) -> Result<usize> {
        match *self {
            Components::Fixed(q) => {
                if q == 0 || q > rank {
                    Err(RobError::InvalidArgument(format!("{q} components requested, data rank is {rank}")))
                } else {
                    Ok(q)
                }
            }
            Components::MinExplained(f) => {
                if !(f > 0.0 && f <= 1.0) {
                    return Err(RobError::InvalidArgument(format!("explained fraction must lie in (0, 1], got {f}")));
                }
                Ok(cumulative.iter().position(|&c| c >= f - 1e-12).map_or(rank, |i| i + 1).min(rank))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaFit<T: Real> {
    pub center: DVector<T>,
    /// p x q, orthonormal columns.
    pub loadings: DMatrix<T>,
    /// Robust variances along the loadings, nonincreasing.
    pub eigenvalues: DVector<T>,
    /// Cumulative explained variance of the first 1..q components.
    pub explained_variance_ratio: Vec<f64>,
    pub method: PcaMethod,
    pub sd_cutoff: f64,
    pub od_cutoff: f64,
    pub seed: Option<u64>,
}

impl<T: Real> PcaFit<T> {
    pub fn n_components(&self) -> usize {
        self.loadings.ncols()
    }
}

fn check_shape<T: Real>(fit: &PcaFit<T>, x: &DMatrix<T>) -> Result<()> {
    if x.ncols() != fit.center.len() {
        return Err(RobError::LengthMismatch(format!(
            "model has {} variables, data has {} columns",
            fit.center.len(),
            x.ncols()
        )));
    }
    Ok(())
}

/// (X - center) loadings.
pub fn scores<T: Real>(fit: &PcaFit<T>, x: &DMatrix<T>) -> Result<DMatrix<T>> {
    check_shape(fit, x)?;
    let mut c = x.clone();
    for mut row in c.row_iter_mut() {
        row -= fit.center.transpose();
    }
    Ok(c * &fit.loadings)
}

/// center + scores loadings'.
pub fn project<T: Real>(fit: &PcaFit<T>, x: &DMatrix<T>) -> Result<DMatrix<T>> {
    let t = scores(fit, x)?;
    let mut out = t * fit.loadings.transpose();
    for mut row in out.row_iter_mut() {
        row += fit.center.transpose();
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PcaClass {
    Regular,
    Orthogonal,
    GoodLeverage,
    BadLeverage,
}

impl PcaClass {
    pub fn classify(sd: f64, od: f64, sd_cutoff: f64, od_cutoff: f64) -> Self {
        match (sd > sd_cutoff, od > od_cutoff) {
            (false, false) => PcaClass::Regular,
            (false, true) => PcaClass::Orthogonal,
            (true, false) => PcaClass::GoodLeverage,
            (true, true) => PcaClass::BadLeverage,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            PcaClass::Regular => "regular",
            PcaClass::Orthogonal => "orthogonal",
            PcaClass::GoodLeverage => "good_leverage",
            PcaClass::BadLeverage => "bad_leverage",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaOutlierMapData<T: Real> {
    pub score_distances: DVector<T>,
    pub orthogonal_distances: DVector<T>,
    pub sd_cutoff: f64,
    pub od_cutoff: f64,
    pub classes: Vec<PcaClass>,
}

pub(crate) fn score_distances<T: Real>(t: &DMatrix<T>, eigenvalues: &DVector<T>) -> DVector<T> {
    DVector::from_iterator(
        t.nrows(),
        t.row_iter().map(|r| r.iter().zip(eigenvalues.iter()).fold(T::zero(), |s, (&v, &l)| s + v * v / l).sqrt()),
    )
}

pub(crate) fn orthogonal_distances<T: Real>(fit: &PcaFit<T>, x: &DMatrix<T>) -> Result<DVector<T>> {
    let proj = project(fit, x)?;
    Ok(DVector::from_iterator(x.nrows(), (x - proj).row_iter().map(|r| r.norm())))
}

/// (m + z_{0.975} s)^{3/2} with (m, s) the univariate MCD of OD^{2/3}; zero
/// when the orthogonal distances carry no spread.
pub(crate) fn od_cutoff<T: Real>(od: &DVector<T>) -> f64 {
    let v: Vec<f64> = od.iter().map(|&d| as_f64(d).powf(2.0 / 3.0)).collect();
    let top = v.iter().cloned().fold(0.0, f64::max);
    if top <= 1e-12 {
        return 0.0;
    }
    match fit_univariate_mcd(&v, 0.5, true, true) {
        Ok(f) if !f.degenerate => (f.location + norm_ppf(0.975) * f.scale).max(0.0).powf(1.5),
        _ => top.powf(1.5),
    }
}

/// Score distances, orthogonal distances and the four-way classification.
pub fn pca_outlier_map_data<T: Real>(fit: &PcaFit<T>, x: &DMatrix<T>) -> Result<PcaOutlierMapData<T>> {
    let t = scores(fit, x)?;
    let sd = score_distances(&t, &fit.eigenvalues);
    let od = orthogonal_distances(fit, x)?;
    let tol: T = cst(1e-12);
    let classes = sd
        .iter()
        .zip(od.iter())
        .map(|(&s, &o)| {
            // exactly in-subspace points never count as orthogonal outliers
            let o = if o <= tol { 0.0 } else { as_f64(o) };
            PcaClass::classify(as_f64(s), o, fit.sd_cutoff, fit.od_cutoff)
        })
        .collect();
    Ok(PcaOutlierMapData {
        score_distances: sd,
        orthogonal_distances: od,
        sd_cutoff: fit.sd_cutoff,
        od_cutoff: fit.od_cutoff,
        classes,
    })
}

pub(crate) fn sd_cutoff(q: usize) -> f64 {
    chi2_cutoff(q, 0.975)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn choose_components() {
        let cum = [0.75, 0.87, 0.95, 1.0];
        assert_eq!(Components::MinExplained(0.8).choose(&cum, 4).unwrap(), 2);
        assert_eq!(Components::MinExplained(0.7).choose(&cum, 4).unwrap(), 1);
        assert_eq!(Components::Fixed(3).choose(&cum, 4).unwrap(), 3);
        assert!(Components::Fixed(5).choose(&cum, 4).is_err());
    }

    #[test]
    fn classification() {
        assert_eq!(PcaClass::classify(1.0, 1.0, 2.0, 2.0), PcaClass::Regular);
        assert_eq!(PcaClass::classify(1.0, 3.0, 2.0, 2.0), PcaClass::Orthogonal);
        assert_eq!(PcaClass::classify(3.0, 1.0, 2.0, 2.0), PcaClass::GoodLeverage);
        assert_eq!(PcaClass::classify(3.0, 3.0, 2.0, 2.0), PcaClass::BadLeverage);
    }
}
