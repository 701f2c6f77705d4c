use std::sync::OnceLock;

use crate::error::{Result, RobError};
use crate::kernel::optim::normal_expectation;
use crate::kernel::{mad, median, LossFunction};
use crate::scalar::{cst, from_usize, Real};
use crate::univariate::{UnivariateFit, UnivariateMethod};

/// One-step M-estimator: a location weight (applied to r = (x - med)/MAD as
/// psi(r)/r) and a scale psi whose square is averaged and divided by delta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneStepM {
    pub location_loss: LossFunction,
    pub scale_loss: LossFunction,
    pub delta: f64,
}

/// Huber b = 1.5 for both steps.
pub const ONE_STEP_HUBER: f64 = 1.5;

/// E[min(Z^2, b^2)] for standard normal Z.
pub fn huber_delta(b: f64) -> f64 {
    normal_expectation(|z| (z * z).min(b * b))
}

fn default_delta() -> f64 {
    static D: OnceLock<f64> = OnceLock::new();
    *D.get_or_init(|| huber_delta(ONE_STEP_HUBER))
}

impl OneStepM {
    pub fn huber() -> Self {
        OneStepM {
            location_loss: LossFunction::huber(ONE_STEP_HUBER),
            scale_loss: LossFunction::huber(ONE_STEP_HUBER),
            delta: default_delta(),
        }
    }

    /// Bisquare c = 3 location with Huber b = 2.5 scale, as used to standardize columns cellwise.
    pub fn cellwise() -> Self {
        OneStepM {
            location_loss: LossFunction::bisquare(3.0),
            scale_loss: LossFunction::huber(2.5),
            delta: 0.845,
        }
    }

    pub fn fit<T: Real>(&self, x: &[T]) -> Result<UnivariateFit<T>> {
        if x.len() < 2 {
            return Err(RobError::InvalidArgument(format!("one-step M needs n >= 2, got {}", x.len())));
        }
        let med = median(x)?;
        let s0 = mad(x, true)?;
        if !(s0 > T::zero()) {
            return Err(RobError::DegenerateScale);
        }
        let mut sw = T::zero();
        let mut swx = T::zero();
        let mut sq = T::zero();
        for &v in x {
            let r = (v - med) / s0;
            let w = if r.abs() > cst(1e-5) { self.location_loss.psi(r) / r } else { T::one() };
            sw += w;
            swx += w * v;
            let p = self.scale_loss.psi(r);
            sq += p * p;
        }
        let n: T = from_usize(x.len());
        let location = swx / sw;
        let scale = s0 * (sq / (n * cst(self.delta))).sqrt();
        let mut fit = UnivariateFit::simple(location, scale, UnivariateMethod::OnestepM, true);
        fit.raw_location = med;
        fit.raw_scale = s0;
        Ok(fit)
    }
}

/// Huber-weighted one-step M-estimate started from the median and consistent MAD.
pub fn fit_one_step_m<T: Real>(x: &[T]) -> Result<UnivariateFit<T>> {
    OneStepM::huber().fit(x)
}
