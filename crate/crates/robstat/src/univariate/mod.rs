//! Robust univariate location and scale.

mod boxplot;
mod mcd;
mod onestep;
mod qn;
mod tau;

use serde::{Deserialize, Serialize};

pub use boxplot::{adjusted_boxplot_fences, fences_from_summary, BoxplotFences};
pub use mcd::fit_univariate_mcd;
pub use onestep::{fit_one_step_m, huber_delta, OneStepM, ONE_STEP_HUBER};
pub use qn::{fit_qn, qn_naive, qn_raw, QN_CONSTANT};
pub use tau::{fit_tau, tau_consistency};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnivariateMethod {
    Umcd,
    OnestepM,
    Qn,
    Tau,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnivariateFit<T> {
    pub location: T,
    pub scale: T,
    pub method: UnivariateMethod,
    pub h: Option<usize>,
    pub consistency_applied: bool,
    /// Raw (pre-reweighting) estimates; equal to the final ones when no reweighting ran.
    pub raw_location: T,
    pub raw_scale: T,
    /// Set when the sample (or its optimal subset) has no spread.
    pub degenerate: bool,
}

impl<T: Copy> UnivariateFit<T> {
    pub(crate) fn simple(location: T, scale: T, method: UnivariateMethod, consistency_applied: bool) -> Self {
        UnivariateFit {
            location,
            scale,
            method,
            h: None,
            consistency_applied,
            raw_location: location,
            raw_scale: scale,
            degenerate: false,
        }
    }
}
