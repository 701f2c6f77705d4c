use robstat_data::{Column, Frame};
use serde::{Deserialize, Serialize};

use crate::error::{Result, RobError};
use crate::kernel::{mad, median};
use crate::univariate::{fit_one_step_m, fit_qn, fit_tau, fit_univariate_mcd, UnivariateFit};

/// Univariate estimator used for per-column location and scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum ScaleEstimator {
    /// Reweighted, consistent univariate MCD.
    Umcd { alpha: f64 },
    OnestepM,
    Qn,
    Tau,
    /// Median and consistent MAD.
    Mad,
}

impl Default for ScaleEstimator {
    fn default() -> Self {
        ScaleEstimator::Umcd { alpha: 0.75 }
    }
}

impl ScaleEstimator {
    /// (location, scale) of a sample; zero scale is returned as is.
    pub fn estimate(&self, x: &[f64]) -> Result<(f64, f64)> {
        let fit: UnivariateFit<f64> = match *self {
            ScaleEstimator::Umcd { alpha } => fit_univariate_mcd(x, alpha, true, true)?,
            ScaleEstimator::OnestepM => match fit_one_step_m(x) {
                Err(RobError::DegenerateScale) => return Ok((median(x)?, 0.0)),
                r => r?,
            },
            ScaleEstimator::Qn => fit_qn(x)?,
            ScaleEstimator::Tau => match fit_tau(x, 4.5, 3.0, true) {
                Err(RobError::DegenerateScale) => return Ok((median(x)?, 0.0)),
                r => r?,
            },
            ScaleEstimator::Mad => return Ok((median(x)?, mad(x, true)?)),
        };
        Ok((fit.location, fit.scale))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnScaling {
    pub name: String,
    pub location: f64,
    pub scale: f64,
}

/// Per numeric column: (x - location [if centering]) / (scale [if scaling]).
/// Missing cells stay missing and are ignored by the estimator; text columns pass through.
pub fn robust_scale(
    frame: &Frame,
    estimator: ScaleEstimator,
    with_centering: bool,
    with_scaling: bool,
) -> Result<(Frame, Vec<ColumnScaling>)> {
    let mut out = frame.clone();
    let mut params = Vec::new();
    for name in frame.numeric_names() {
        let col = frame.numeric(&name)?;
        let present: Vec<f64> = col.iter().flatten().copied().collect();
        let (location, scale) = estimator.estimate(&present)?;
        if with_scaling && !(scale > 0.0) {
            return Err(RobError::ZeroRobustScale(name));
        }
        let shift = if with_centering { location } else { 0.0 };
        let div = if with_scaling { scale } else { 1.0 };
        out.replace_column(&name, Column::Numeric(col.iter().map(|v| v.map(|x| (x - shift) / div)).collect()))?;
        params.push(ColumnScaling {
            name,
            location: if with_centering { location } else { 0.0 },
            scale: if with_scaling { scale } else { 1.0 },
        });
    }
    Ok((out, params))
}

/// Undoes [`robust_scale`] with the returned parameters.
pub fn unscale(frame: &Frame, params: &[ColumnScaling]) -> Result<Frame> {
    let mut out = frame.clone();
    for p in params {
        let col = frame.numeric(&p.name)?;
        out.replace_column(&p.name, Column::Numeric(col.iter().map(|v| v.map(|x| x * p.scale + p.location)).collect()))?;
    }
    Ok(out)
}
