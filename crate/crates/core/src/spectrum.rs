//! Dichotomy spectrum estimation for scalar and diagonal systems.
//!
//! For a scalar system, the spectral interval endpoints are the asymptotic
//! bounds of `log Phi(t, s) / (log mu(t) - log mu(s))` over pairs with
//! growing separation (Bohl-type exponents relative to `mu`): the
//! `(mu, gamma)`-shifted system contracts exactly when `gamma` exceeds the
//! upper exponent and expands when `gamma` is below the lower one. Diagonal
//! systems decouple into channels whose intervals are merged. The resolvent
//! test provides the independent cross-check: it shifts the system, picks a
//! projector from the sign pattern of the shifted exponents and fits the
//! minimal admissible constant.
//!
//! General (non-diagonal) matrix systems are out of scope for the estimator:
//! the theory covers them but supplies no algorithm, and keeping the
//! estimator verifiable against closed forms wins here.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dichotomy::{fit_minimal_k, DichotomyCertificate, FitExponents, Projector};
use crate::error::{CoreError, CoreResult};
use crate::evolution::EvolutionOperator;
use crate::grid::{log_spaced, WindowSchedule};
use crate::rate::GrowthRate;
use crate::system::{shift_system, Coefficient, LinearSystem};

/// Minimal `dlog mu` separation for exponent ratios.
pub const BOHL_DLOG_MIN: f64 = 1.0;
/// A ratio statistic past this magnitude with monotone trend reads as `±inf`.
pub const BOHL_INFINITY_THRESHOLD: f64 = 50.0;

/// The extended real line with its usual total order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedReal {
    NegInfinity,
    Finite(f64),
    PosInfinity,
}

impl ExtendedReal {
    pub fn from_f64(x: f64) -> CoreResult<Self> {
        if x.is_nan() {
            return Err(CoreError::Domain("NaN is not an extended real".into()));
        }
        Ok(if x == f64::INFINITY {
            ExtendedReal::PosInfinity
        } else if x == f64::NEG_INFINITY {
            ExtendedReal::NegInfinity
        } else {
            ExtendedReal::Finite(x)
        })
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use ExtendedReal::*;
        Some(match (self, other) {
            (NegInfinity, NegInfinity) | (PosInfinity, PosInfinity) => Ordering::Equal,
            (NegInfinity, _) | (_, PosInfinity) => Ordering::Less,
            (PosInfinity, _) | (_, NegInfinity) => Ordering::Greater,
            (Finite(a), Finite(b)) => a.partial_cmp(b)?,
        })
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::NegInfinity => write!(f, "-inf"),
            ExtendedReal::PosInfinity => write!(f, "+inf"),
            ExtendedReal::Finite(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::NegInfinity => serializer.serialize_str("-inf"),
            ExtendedReal::PosInfinity => serializer.serialize_str("+inf"),
            ExtendedReal::Finite(x) => serializer.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExtendedReal;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a finite number, \"+inf\" or \"-inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtendedReal, E> {
                ExtendedReal::from_f64(v).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtendedReal, E> {
                Ok(ExtendedReal::Finite(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtendedReal, E> {
                Ok(ExtendedReal::Finite(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtendedReal, E> {
                match v {
                    "+inf" | "inf" => Ok(ExtendedReal::PosInfinity),
                    "-inf" => Ok(ExtendedReal::NegInfinity),
                    other => other
                        .parse::<f64>()
                        .map_err(E::custom)
                        .and_then(|x| ExtendedReal::from_f64(x).map_err(E::custom)),
                }
            }
        }
        deserializer.deserialize_any(V)
    }
}

/// Bohl-type exponents of a scalar system relative to a rate.
#[derive(Clone, Debug, Serialize)]
pub struct BohlExponents {
    pub lower: ExtendedReal,
    pub upper: ExtendedReal,
    /// Half-width of the last two window-stage estimates.
    pub uncertainty: f64,
    pub stage_upper: Vec<f64>,
    pub stage_lower: Vec<f64>,
}

fn scalar_channel_system(system: &LinearSystem, idx: usize) -> CoreResult<LinearSystem> {
    let channels = system
        .channels()
        .ok_or_else(|| CoreError::Unsupported("general matrix systems are not supported".into()))?;
    Ok(LinearSystem {
        coefficient: Coefficient::Scalar(channels[idx].clone()),
        label: format!("{}[{idx}]", system.label),
    })
}

/// Estimate the lower/upper Bohl exponents of a scalar system.
pub fn bohl_exponents(
    system: &LinearSystem,
    rate: &GrowthRate,
    windows: &WindowSchedule,
) -> CoreResult<BohlExponents> {
    if !system.is_scalar() {
        return Err(CoreError::Unsupported(
            "bohl_exponents needs a scalar system; use estimate_spectrum for diagonal ones".into(),
        ));
    }
    let op = EvolutionOperator::auto(system);
    let mut stage_upper = Vec::new();
    let mut stage_lower = Vec::new();
    for t_max in windows.windows() {
        let anchors = [
            -t_max,
            -0.75 * t_max,
            -0.5 * t_max,
            -0.25 * t_max,
            0.0,
            0.25 * t_max,
            0.5 * t_max,
        ];
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        let mut seen = false;
        for d in log_spaced(0.5 * t_max, 2.0 * t_max, 9) {
            for &s in &anchors {
                let t = s + d;
                if t.abs() > t_max {
                    continue;
                }
                let dmu = rate.log_ratio(t, s);
                if dmu < BOHL_DLOG_MIN {
                    continue;
                }
                let ratio = op.log_norm(t, s)? / dmu;
                hi = hi.max(ratio);
                lo = lo.min(ratio);
                seen = true;
            }
        }
        if seen {
            stage_upper.push(hi);
            stage_lower.push(lo);
        }
    }
    if stage_upper.len() < 3 {
        return Err(CoreError::parameter(
            "window",
            format!(
                "rate `{rate:?}` cannot reach dlog mu >= {BOHL_DLOG_MIN} on enough window stages"
            ),
        ));
    }
    let n = stage_upper.len();
    let infinite = |vals: &[f64], up: bool| -> bool {
        let (a, b, c) = (vals[n - 3], vals[n - 2], vals[n - 1]);
        if up {
            c > BOHL_INFINITY_THRESHOLD && c >= b && b >= a
        } else {
            c < -BOHL_INFINITY_THRESHOLD && c <= b && b <= a
        }
    };
    let settle = |vals: &[f64]| -> (f64, f64) {
        let (prev, last) = (vals[n - 2], vals[n - 1]);
        (0.5 * (prev + last), 0.5 * (last - prev).abs())
    };
    let (upper, u_unc) = if infinite(&stage_upper, true) {
        (ExtendedReal::PosInfinity, 0.0)
    } else if infinite(&stage_upper, false) {
        (ExtendedReal::NegInfinity, 0.0)
    } else {
        let (v, unc) = settle(&stage_upper);
        (ExtendedReal::Finite(v), unc)
    };
    let (lower, l_unc) = if infinite(&stage_lower, true) {
        (ExtendedReal::PosInfinity, 0.0)
    } else if infinite(&stage_lower, false) {
        (ExtendedReal::NegInfinity, 0.0)
    } else {
        let (v, unc) = settle(&stage_lower);
        (ExtendedReal::Finite(v), unc)
    };
    // Guard against tiny numeric inversions of the order.
    let (lower, upper) = if lower.partial_cmp(&upper) == Some(Ordering::Greater) {
        (upper, lower)
    } else {
        (lower, upper)
    };
    Ok(BohlExponents {
        lower,
        upper,
        uncertainty: u_unc.max(l_unc),
        stage_upper,
        stage_lower,
    })
}

/// One closed spectral interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralInterval {
    pub lo: ExtendedReal,
    pub hi: ExtendedReal,
}

impl SpectralInterval {
    pub fn new(lo: ExtendedReal, hi: ExtendedReal) -> CoreResult<Self> {
        if lo.partial_cmp(&hi) == Some(Ordering::Greater) {
            return Err(CoreError::parameter("interval", "needs lo <= hi"));
        }
        Ok(SpectralInterval { lo, hi })
    }
}

/// Estimator diagnostics attached to a spectrum.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumDiagnostics {
    pub window_t0: f64,
    pub window_stages: usize,
    pub dlog_min: f64,
    /// Per-interval endpoint uncertainty (half-width of the last two stages).
    pub endpoint_uncertainty: Vec<f64>,
}

/// An estimated dichotomy spectrum: sorted, pairwise disjoint closed
/// intervals, at most one per system dimension.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumEstimate {
    pub intervals: Vec<SpectralInterval>,
    pub rate: GrowthRate,
    pub diagnostics: SpectrumDiagnostics,
}

impl SpectrumEstimate {
    fn validate(&self, dimension: usize) -> CoreResult<()> {
        if self.intervals.len() > dimension {
            return Err(CoreError::Domain(format!(
                "{} spectral intervals exceed the dimension {dimension}",
                self.intervals.len()
            )));
        }
        for w in self.intervals.windows(2) {
            let strictly_separated = w[0].hi.partial_cmp(&w[1].lo) == Some(Ordering::Less);
            if !strictly_separated {
                return Err(CoreError::Domain(
                    "spectral intervals must be sorted and strictly separated".into(),
                ));
            }
        }
        Ok(())
    }

    /// Open spectral gaps between (not outside) consecutive intervals.
    pub fn gaps(&self) -> Vec<(ExtendedReal, ExtendedReal)> {
        self.intervals
            .windows(2)
            .map(|w| (w[0].hi, w[1].lo))
            .collect()
    }
}

/// Estimate the dichotomy spectrum of a scalar or diagonal system by
/// per-channel Bohl exponents; overlapping or touching intervals merge.
pub fn estimate_spectrum(
    system: &LinearSystem,
    rate: &GrowthRate,
    windows: &WindowSchedule,
) -> CoreResult<SpectrumEstimate> {
    let n_channels = system
        .channels()
        .ok_or_else(|| {
            CoreError::Unsupported(
                "spectrum estimation covers scalar and diagonal systems only".into(),
            )
        })?
        .len();
    let mut raw: Vec<(SpectralInterval, f64)> = Vec::with_capacity(n_channels);
    for idx in 0..n_channels {
        let sub = scalar_channel_system(system, idx)?;
        let exps = bohl_exponents(&sub, rate, windows)?;
        raw.push((SpectralInterval::new(exps.lower, exps.upper)?, exps.uncertainty));
    }
    raw.sort_by(|a, b| {
        a.0.lo
            .partial_cmp(&b.0.lo)
            .unwrap_or(Ordering::Equal)
            .then(a.0.hi.partial_cmp(&b.0.hi).unwrap_or(Ordering::Equal))
    });
    let mut intervals: Vec<SpectralInterval> = Vec::new();
    let mut uncertainty: Vec<f64> = Vec::new();
    for (iv, unc) in raw {
        match intervals.last_mut() {
            Some(last) if iv.lo.partial_cmp(&last.hi) != Some(Ordering::Greater) => {
                if last.hi.partial_cmp(&iv.hi) == Some(Ordering::Less) {
                    last.hi = iv.hi;
                }
                let u = uncertainty.last_mut().unwrap();
                *u = u.max(unc);
            }
            _ => {
                intervals.push(iv);
                uncertainty.push(unc);
            }
        }
    }
    let estimate = SpectrumEstimate {
        intervals,
        rate: rate.clone(),
        diagnostics: SpectrumDiagnostics {
            window_t0: windows.t0,
            window_stages: windows.stages,
            dlog_min: BOHL_DLOG_MIN,
            endpoint_uncertainty: uncertainty,
        },
    };
    estimate.validate(system.dimension())?;
    Ok(estimate)
}

/// Outcome of a resolvent membership test at one `gamma`.
#[derive(Clone, Debug, Serialize)]
pub struct ResolventReport {
    pub gamma: ExtendedReal,
    pub in_resolvent: bool,
    /// Finite anchor used for the `gamma = +-inf` convention.
    pub anchor_gamma: Option<f64>,
    pub certificate: Option<DichotomyCertificate>,
}

fn channel_exponents(
    system: &LinearSystem,
    rate: &GrowthRate,
    windows: &WindowSchedule,
) -> CoreResult<Vec<BohlExponents>> {
    let n = system
        .channels()
        .ok_or_else(|| {
            CoreError::Unsupported("resolvent tests cover scalar and diagonal systems only".into())
        })?
        .len();
    (0..n)
        .map(|idx| bohl_exponents(&scalar_channel_system(system, idx)?, rate, windows))
        .collect()
}

fn finite_resolvent_test(
    system: &LinearSystem,
    rate: &GrowthRate,
    gamma: f64,
    windows: &WindowSchedule,
    anchor: Option<f64>,
    require_projector: Option<&'static str>,
) -> CoreResult<ResolventReport> {
    let reported_gamma = ExtendedReal::Finite(gamma);
    let shifted = shift_system(system, rate, gamma)?;
    let exps = channel_exponents(&shifted, rate, windows)?;
    let mut stable = Vec::new();
    let mut unstable = Vec::new();
    let mut undecided = false;
    for (i, e) in exps.iter().enumerate() {
        let contracting = match e.upper {
            ExtendedReal::NegInfinity => true,
            ExtendedReal::Finite(x) => x < 0.0,
            ExtendedReal::PosInfinity => false,
        };
        let expanding = match e.lower {
            ExtendedReal::PosInfinity => true,
            ExtendedReal::Finite(x) => x > 0.0,
            ExtendedReal::NegInfinity => false,
        };
        if contracting {
            stable.push(i);
        } else if expanding {
            unstable.push(i);
        } else {
            undecided = true;
        }
    }
    let dim = exps.len();
    if undecided {
        return Ok(ResolventReport {
            gamma: reported_gamma,
            in_resolvent: false,
            anchor_gamma: anchor,
            certificate: None,
        });
    }
    let projector = if stable.len() == dim {
        Projector::Identity
    } else if stable.is_empty() {
        Projector::Zero
    } else {
        let mut m = nalgebra::DMatrix::zeros(dim, dim);
        for &i in &stable {
            m[(i, i)] = 1.0;
        }
        Projector::ConstantMatrix(m)
    };
    if let Some(required) = require_projector {
        if projector.kind_name() != required {
            return Ok(ResolventReport {
                gamma: reported_gamma,
                in_resolvent: false,
                anchor_gamma: anchor,
                certificate: None,
            });
        }
    }
    let alpha = if stable.is_empty() {
        None
    } else {
        let worst = stable
            .iter()
            .filter_map(|&i| exps[i].upper.finite())
            .fold(f64::NEG_INFINITY, f64::max);
        Some(if worst == f64::NEG_INFINITY { -1.0 } else { worst / 2.0 })
    };
    let beta = if unstable.is_empty() {
        None
    } else {
        let worst = unstable
            .iter()
            .filter_map(|&i| exps[i].lower.finite())
            .fold(f64::INFINITY, f64::min);
        Some(if worst == f64::INFINITY { 1.0 } else { worst / 2.0 })
    };
    let fit = fit_minimal_k(
        &shifted,
        &projector,
        rate,
        FitExponents {
            alpha,
            beta,
            theta: 0.0,
            nu: 0.0,
        },
        windows,
    )?;
    let certificate = if fit.stable {
        Some(DichotomyCertificate::with_log_k(
            projector,
            fit.log_k,
            alpha,
            beta,
            alpha.map(|_| 0.0),
            beta.map(|_| 0.0),
            rate.clone(),
        )?)
    } else {
        None
    };
    Ok(ResolventReport {
        gamma: reported_gamma,
        in_resolvent: fit.stable,
        anchor_gamma: anchor,
        certificate,
    })
}

/// Test whether `gamma` belongs to the resolvent set of the system. Finite
/// `gamma` shifts the system and fits a certificate with the projector chosen
/// by the sign pattern of the shifted Bohl exponents; `gamma = +inf` (resp.
/// `-inf`) tests the convention: an Identity- (resp. Zero-) projector
/// dichotomy at some finite anchor.
pub fn resolvent_test(
    system: &LinearSystem,
    rate: &GrowthRate,
    gamma: ExtendedReal,
    windows: &WindowSchedule,
) -> CoreResult<ResolventReport> {
    match gamma {
        ExtendedReal::Finite(g) => {
            if !g.is_finite() {
                return Err(CoreError::parameter("gamma", "must be finite or +-inf"));
            }
            finite_resolvent_test(system, rate, g, windows, None, None)
        }
        ExtendedReal::PosInfinity => {
            let exps = channel_exponents(system, rate, windows)?;
            let mut anchor = 1.0f64;
            for e in &exps {
                match e.upper {
                    ExtendedReal::PosInfinity => {
                        return Ok(ResolventReport {
                            gamma,
                            in_resolvent: false,
                            anchor_gamma: None,
                            certificate: None,
                        })
                    }
                    ExtendedReal::Finite(x) => anchor = anchor.max(x + 1.0),
                    ExtendedReal::NegInfinity => {}
                }
            }
            let mut rep =
                finite_resolvent_test(system, rate, anchor, windows, Some(anchor), Some("identity"))?;
            rep.gamma = ExtendedReal::PosInfinity;
            Ok(rep)
        }
        ExtendedReal::NegInfinity => {
            let exps = channel_exponents(system, rate, windows)?;
            let mut anchor = -1.0f64;
            for e in &exps {
                match e.lower {
                    ExtendedReal::NegInfinity => {
                        return Ok(ResolventReport {
                            gamma,
                            in_resolvent: false,
                            anchor_gamma: None,
                            certificate: None,
                        })
                    }
                    ExtendedReal::Finite(x) => anchor = anchor.min(x - 1.0),
                    ExtendedReal::PosInfinity => {}
                }
            }
            let mut rep =
                finite_resolvent_test(system, rate, anchor, windows, Some(anchor), Some("zero"))?;
            rep.gamma = ExtendedReal::NegInfinity;
            Ok(rep)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w() -> WindowSchedule {
        WindowSchedule::bohl_default()
    }

    fn assert_singleton(est: &SpectrumEstimate, value: f64, tol: f64) {
        assert_eq!(est.intervals.len(), 1, "{:?}", est.intervals);
        let iv = est.intervals[0];
        let lo = iv.lo.finite().expect("finite lo");
        let hi = iv.hi.finite().expect("finite hi");
        assert!((lo - value).abs() <= tol && (hi - value).abs() <= tol, "[{lo}, {hi}] vs {value}");
    }

    #[test]
    fn constant_system_under_exponential_rate() {
        let e = bohl_exponents(&LinearSystem::constant(-1.0), &GrowthRate::Exponential, &w())
            .unwrap();
        assert!(matches!(e.lower, ExtendedReal::Finite(x) if (x + 1.0).abs() < 1e-2));
        assert!(matches!(e.upper, ExtendedReal::Finite(x) if (x + 1.0).abs() < 1e-2));
    }

    #[test]
    fn poly_decay_under_polynomial_rate_is_unit() {
        let e = bohl_exponents(&LinearSystem::poly_decay(), &GrowthRate::Polynomial, &w())
            .unwrap();
        assert!(matches!(e.lower, ExtendedReal::Finite(x) if (x - 1.0).abs() < 1e-2));
        assert!(matches!(e.upper, ExtendedReal::Finite(x) if (x - 1.0).abs() < 1e-2));
    }

    #[test]
    fn drift_under_polynomial_rate_diverges() {
        let e = bohl_exponents(&LinearSystem::constant(1.0), &GrowthRate::Polynomial, &w())
            .unwrap();
        assert_eq!(e.upper, ExtendedReal::PosInfinity);
        assert_eq!(e.lower, ExtendedReal::PosInfinity);
    }

    #[test]
    fn spectrum_examples() {
        let diag = LinearSystem::constant_diagonal(&[-1.0, 2.0]).unwrap();
        let est = estimate_spectrum(&diag, &GrowthRate::Exponential, &w()).unwrap();
        assert_eq!(est.intervals.len(), 2);
        assert!((est.intervals[0].lo.finite().unwrap() + 1.0).abs() < 1e-2);
        assert!((est.intervals[1].hi.finite().unwrap() - 2.0).abs() < 1e-2);

        let est = estimate_spectrum(&LinearSystem::poly_decay(), &GrowthRate::Polynomial, &w())
            .unwrap();
        assert_singleton(&est, 1.0, 1e-2);

        let est = estimate_spectrum(&LinearSystem::abs_ramp(2.0), &GrowthRate::quadratic(), &w())
            .unwrap();
        assert_singleton(&est, 1.0, 1e-2);

        // Fast-rate collapse: a bounded coefficient under the quadratic rate.
        let est = estimate_spectrum(&LinearSystem::constant(1.0), &GrowthRate::quadratic(), &w())
            .unwrap();
        assert_singleton(&est, 0.0, 1e-2);
    }

    #[test]
    fn merged_channels_keep_structure() {
        let diag = LinearSystem::constant_diagonal(&[1.0, 1.0, -2.0]).unwrap();
        let est = estimate_spectrum(&diag, &GrowthRate::Exponential, &w()).unwrap();
        assert_eq!(est.intervals.len(), 2);
        assert!(est.intervals.len() <= diag.dimension());
        assert_eq!(est.gaps().len(), 1);
    }

    #[test]
    fn matrix_systems_are_rejected() {
        let func: crate::system::MatrixFn =
            std::sync::Arc::new(|_| nalgebra::DMatrix::from_element(2, 2, 0.1));
        let sys = LinearSystem::matrix(func, 2, "dense").unwrap();
        assert!(matches!(
            estimate_spectrum(&sys, &GrowthRate::Exponential, &w()),
            Err(CoreError::Unsupported(_))
        ));
    }

    #[test]
    fn resolvent_examples() {
        // Contracting constant system at gamma = 0: resolvent, projector Id.
        let rep = resolvent_test(
            &LinearSystem::constant(-1.0),
            &GrowthRate::Exponential,
            ExtendedReal::Finite(0.0),
            &w(),
        )
        .unwrap();
        assert!(rep.in_resolvent);
        assert_eq!(rep.certificate.unwrap().projector().kind_name(), "identity");

        // gamma = 1 sits exactly on the poly-decay spectral interval.
        let rep = resolvent_test(
            &LinearSystem::poly_decay(),
            &GrowthRate::Polynomial,
            ExtendedReal::Finite(1.0),
            &w(),
        )
        .unwrap();
        assert!(!rep.in_resolvent);

        // The zero system has a dichotomy for gamma = +inf.
        let rep = resolvent_test(
            &LinearSystem::constant(0.0),
            &GrowthRate::Exponential,
            ExtendedReal::PosInfinity,
            &w(),
        )
        .unwrap();
        assert!(rep.in_resolvent);
        assert!(rep.anchor_gamma.unwrap() > 0.0);
    }

    #[test]
    fn resolvent_in_gap_and_in_interval() {
        let diag = LinearSystem::constant_diagonal(&[-1.0, 2.0]).unwrap();
        let rate = GrowthRate::Exponential;
        let gap = resolvent_test(&diag, &rate, ExtendedReal::Finite(0.5), &w()).unwrap();
        assert!(gap.in_resolvent);
        assert_eq!(
            gap.certificate.unwrap().projector().kind_name(),
            "constant-matrix"
        );
        let inside = resolvent_test(&diag, &rate, ExtendedReal::Finite(2.0), &w()).unwrap();
        assert!(!inside.in_resolvent);
    }

    #[test]
    fn extended_real_order_and_serde() {
        use ExtendedReal::*;
        assert!(NegInfinity < Finite(-1e300));
        assert!(Finite(1e300) < PosInfinity);
        assert!(Finite(1.0) < Finite(2.0));
        let s = serde_json::to_string(&vec![NegInfinity, Finite(0.5), PosInfinity]).unwrap();
        assert_eq!(s, "[\"-inf\",0.5,\"+inf\"]");
        let back: Vec<ExtendedReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![NegInfinity, Finite(0.5), PosInfinity]);
    }
}
