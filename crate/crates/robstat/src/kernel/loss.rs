use serde::{Deserialize, Serialize};

use crate::scalar::{cst, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    Huber,
    TukeyBisquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossEval {
    Rho,
    Psi,
    Weight,
}

/// Huber (tuning b) or Tukey bisquare (tuning c) loss.
///
/// The bisquare rho is normalized to reach 1 at |u| = c; its psi is the
/// conventional u(1 - (u/c)^2)^2, i.e. (c^2/6) times the derivative of rho.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossFunction {
    pub kind: LossKind,
    pub tuning: f64,
}

impl LossFunction {
    pub fn huber(b: f64) -> Self {
        LossFunction { kind: LossKind::Huber, tuning: b }
    }

    pub fn bisquare(c: f64) -> Self {
        LossFunction { kind: LossKind::TukeyBisquare, tuning: c }
    }

    pub fn rho<T: Real>(&self, u: T) -> T {
        let k: T = cst(self.tuning);
        let a = u.abs();
        match self.kind {
            LossKind::Huber => {
                if a <= k {
                    u * u / cst(2.0)
                } else {
                    k * a - k * k / cst(2.0)
                }
            }
            LossKind::TukeyBisquare => {
                if a >= k {
                    T::one()
                } else {
                    let t = u / k;
                    let s = T::one() - t * t;
                    T::one() - s * s * s
                }
            }
        }
    }

    pub fn psi<T: Real>(&self, u: T) -> T {
        let k: T = cst(self.tuning);
        match self.kind {
            LossKind::Huber => u.clamp(-k, k),
            LossKind::TukeyBisquare => {
                if u.abs() >= k {
                    T::zero()
                } else {
                    let t = u / k;
                    let s = T::one() - t * t;
                    u * s * s
                }
            }
        }
    }

    pub fn weight<T: Real>(&self, u: T) -> T {
        let k: T = cst(self.tuning);
        let a = u.abs();
        match self.kind {
            LossKind::Huber => {
                if a <= k {
                    T::one()
                } else {
                    k / a
                }
            }
            LossKind::TukeyBisquare => {
                if a >= k {
                    T::zero()
                } else {
                    let t = u / k;
                    let s = T::one() - t * t;
                    s * s
                }
            }
        }
    }

    pub fn eval<T: Real>(&self, u: T, which: LossEval) -> T {
        match which {
            LossEval::Rho => self.rho(u),
            LossEval::Psi => self.psi(u),
            LossEval::Weight => self.weight(u),
        }
    }
}

pub fn loss_eval<T: Real>(f: &LossFunction, u: T, which: LossEval) -> T {
    f.eval(u, which)
}
