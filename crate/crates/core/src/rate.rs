//! Growth rates evaluated in log-space.
//!
//! A growth rate is a strictly increasing differentiable function
//! `mu: R -> R+` with `mu(0) = 1`, `mu(-inf) = 0` and `mu(+inf) = +inf`.
//! The catalog covers the exponential rate, the polynomial rate
//! `p(t) = (|t|+1)^sgn(t)`, the superexponential family
//! `s_r(t) = exp(sgn(t)|t|^r)` for `r > 1` and the subexponential family
//! `u_r(t) = exp(sgn(t)((|t|+1)^r - 1))` for `r` in `(0,1)`, together with
//! translations `mu_tau(t) = mu(t+tau)/mu(tau)` and powers `mu^k`.
//!
//! Everything is stored and evaluated as `log mu`: superexponential values
//! overflow `f64` for |t| around 27, while their logs stay representable, and
//! every quantity downstream only ever needs ratios `mu(t)/mu(s)`.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, CoreResult};
use crate::grid::sgn;

/// A growth rate, identified by its construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GrowthRate {
    /// `exp(t)`; the unique translation-fixed family together with its powers.
    Exponential,
    /// `p(t) = (|t|+1)^sgn(t)`.
    Polynomial,
    /// `s_r(t) = exp(sgn(t) |t|^r)` with `r > 1`.
    Superexponential { r: f64 },
    /// `u_r(t) = exp(sgn(t) ((|t|+1)^r - 1))` with `0 < r < 1`.
    Subexponential { r: f64 },
    /// `mu_tau(t) = mu(t+tau)/mu(tau)`.
    Translated { base: Box<GrowthRate>, tau: f64 },
    /// `mu(t)^k` with `k > 0`.
    Power { base: Box<GrowthRate>, k: f64 },
}

impl GrowthRate {
    pub fn superexponential(r: f64) -> CoreResult<Self> {
        if !(r.is_finite() && r > 1.0) {
            return Err(CoreError::parameter("rate.r", "superexponential exponent must be > 1"));
        }
        Ok(GrowthRate::Superexponential { r })
    }

    pub fn subexponential(r: f64) -> CoreResult<Self> {
        if !(r.is_finite() && r > 0.0 && r < 1.0) {
            return Err(CoreError::parameter("rate.r", "subexponential exponent must be in (0,1)"));
        }
        Ok(GrowthRate::Subexponential { r })
    }

    /// The quadratic rate `q = s_2`.
    pub fn quadratic() -> Self {
        GrowthRate::Superexponential { r: 2.0 }
    }

    pub fn power(self, k: f64) -> CoreResult<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(CoreError::parameter("rate.k", "power must be finite and > 0"));
        }
        Ok(GrowthRate::Power { base: Box::new(self), k })
    }

    /// `log mu(t)`. Finite `t` is the caller's contract; NaN propagates.
    pub fn log_eval(&self, t: f64) -> f64 {
        match self {
            GrowthRate::Exponential => t,
            GrowthRate::Polynomial => sgn(t) * t.abs().ln_1p(),
            GrowthRate::Superexponential { r } => sgn(t) * t.abs().powf(*r),
            GrowthRate::Subexponential { r } => sgn(t) * ((t.abs() + 1.0).powf(*r) - 1.0),
            GrowthRate::Translated { base, tau } => base.log_eval(t + tau) - base.log_eval(*tau),
            GrowthRate::Power { base, k } => k * base.log_eval(t),
        }
    }

    /// `d/dt log mu(t)`. One-sided at the `t = 0` kink of the sign-piecewise
    /// catalog rates (where both one-sided values in fact agree).
    pub fn log_derivative(&self, t: f64) -> f64 {
        match self {
            GrowthRate::Exponential => 1.0,
            GrowthRate::Polynomial => 1.0 / (1.0 + t.abs()),
            GrowthRate::Superexponential { r } => r * t.abs().powf(r - 1.0),
            GrowthRate::Subexponential { r } => r * (t.abs() + 1.0).powf(r - 1.0),
            GrowthRate::Translated { base, tau } => base.log_derivative(t + tau),
            GrowthRate::Power { base, k } => k * base.log_derivative(t),
        }
    }

    /// `log(mu(t)/mu(s)) = log mu(t) - log mu(s)`.
    pub fn log_ratio(&self, t: f64, s: f64) -> f64 {
        self.log_eval(t) - self.log_eval(s)
    }

    /// True when every translate of the rate is the rate itself, which is the
    /// case exactly for the exponential rate and its powers.
    pub fn is_translation_invariant(&self) -> bool {
        match self {
            GrowthRate::Exponential => true,
            GrowthRate::Power { base, .. } | GrowthRate::Translated { base, .. } => {
                base.is_translation_invariant()
            }
            _ => false,
        }
    }

    /// Distance from zero below which sign-piecewise rates have a numeric
    /// kink in `log_derivative`; finite-difference checks stay outside it.
    pub const KINK_GUARD: f64 = 1e-3;

    /// Recheck the parameter ranges, for rates built by deserialization
    /// rather than through the constructors.
    pub fn validate(&self) -> CoreResult<()> {
        match self {
            GrowthRate::Exponential | GrowthRate::Polynomial => Ok(()),
            GrowthRate::Superexponential { r } => {
                if r.is_finite() && *r > 1.0 {
                    Ok(())
                } else {
                    Err(CoreError::parameter("rate.r", "superexponential exponent must be > 1"))
                }
            }
            GrowthRate::Subexponential { r } => {
                if r.is_finite() && *r > 0.0 && *r < 1.0 {
                    Ok(())
                } else {
                    Err(CoreError::parameter("rate.r", "subexponential exponent must be in (0,1)"))
                }
            }
            GrowthRate::Translated { base, tau } => {
                if !tau.is_finite() {
                    return Err(CoreError::parameter("rate.tau", "must be finite"));
                }
                base.validate()
            }
            GrowthRate::Power { base, k } => {
                if !(k.is_finite() && *k > 0.0) {
                    return Err(CoreError::parameter("rate.k", "power must be finite and > 0"));
                }
                base.validate()
            }
        }
    }
}

/// `log mu(t)` with the domain contract made explicit.
pub fn eval_log(rate: &GrowthRate, t: f64) -> CoreResult<f64> {
    if !t.is_finite() {
        return Err(CoreError::Domain(format!("rate evaluated at non-finite t = {t}")));
    }
    Ok(rate.log_eval(t))
}

/// The tau-translated rate. Translation is collapsed analytically: nested
/// translates add their offsets, and translation-invariant rates (exponential
/// and its powers) are returned unchanged so that their fixed-point identity
/// holds exactly rather than up to rounding.
pub fn translate(rate: &GrowthRate, tau: f64) -> CoreResult<GrowthRate> {
    if !tau.is_finite() {
        return Err(CoreError::parameter("tau", "translation offset must be finite"));
    }
    if tau == 0.0 || rate.is_translation_invariant() {
        return Ok(rate.clone());
    }
    Ok(match rate {
        GrowthRate::Translated { base, tau: t0 } => GrowthRate::Translated {
            base: base.clone(),
            tau: t0 + tau,
        },
        other => GrowthRate::Translated {
            base: Box::new(other.clone()),
            tau,
        },
    })
}
