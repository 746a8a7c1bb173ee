//! Comparison of growth rates, slow/fast classification and translated-rate
//! limit probes.
//!
//! `mu` is *weakly faster* than `sigma` when `sigma(t)/sigma(s) <= M mu(t)/mu(s)`
//! for all `t >= s`; it is *faster* when for all negative exponent pairs the
//! contraction by `mu` dominates the one by `sigma` up to a constant.
//! Boundedness over an unbounded domain is undecidable from finite data, so
//! both tests watch a sup statistic over doubling windows and report a
//! verdict only when the statistic either settles below a declared plateau
//! tolerance or runs away past a declared divergence threshold. The strong
//! test uses decay of the ratio `dlog sigma / dlog mu` toward zero as a proxy
//! for the universally quantified exponent condition; the proxy is valid on
//! the monotone catalog rates.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, CoreResult};
use crate::grid::{
    classify_sweep, decays_below, PairGrid, SweepTrend, WindowSchedule, DIVERGENCE_LOG_THRESHOLD,
    PLATEAU_TOL,
};
use crate::rate::GrowthRate;

/// Ratio below which the strong-comparison statistic counts as decayed to 0.
pub const STRONG_RATIO_THRESHOLD: f64 = 0.05;
/// Minimal `dlog mu` separation for ratio statistics.
pub const RATIO_DLOG_MIN: f64 = 1.0;

/// How two rates relate, as decided by the sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    WeaklyFaster,
    WeaklySlower,
    Faster,
    Slower,
    Incomparable,
    Inconclusive,
}

/// Diagnostics attached to every verdict.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Evidence {
    pub pairs_evaluated: usize,
    pub final_window: f64,
    /// Change of the decisive statistic over the last doubling.
    pub final_increment: f64,
    pub stage_values: Vec<f64>,
}

/// Outcome of a weak or strong comparison.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComparisonVerdict {
    pub relation: Relation,
    /// `log M` for the comparison constant; present exactly for the bounded
    /// verdicts (weakly faster/slower, faster, slower).
    pub constant_estimate: Option<f64>,
    pub evidence: Evidence,
}

struct SweepData {
    /// Per stage: sup of `dlog sigma - dlog mu` (bounded iff mu weakly faster).
    sup_fwd: Vec<f64>,
    /// Per stage: sup of `dlog mu - dlog sigma`.
    sup_rev: Vec<f64>,
    /// Per stage: sup of `dlog sigma / dlog mu` over window-scale separations.
    ratio_fwd: Vec<f64>,
    /// Per stage: sup of `dlog mu / dlog sigma` over window-scale separations.
    ratio_rev: Vec<f64>,
    pairs: usize,
    final_window: f64,
}

fn sweep(mu: &GrowthRate, sigma: &GrowthRate, window: &WindowSchedule) -> SweepData {
    let mut data = SweepData {
        sup_fwd: Vec::new(),
        sup_rev: Vec::new(),
        ratio_fwd: Vec::new(),
        ratio_rev: Vec::new(),
        pairs: 0,
        final_window: window.last_window(),
    };
    // The windowed sup statistics are monotone in T, so they are accumulated
    // as running maxima; per-stage grids alone would jitter as anchors move.
    // The ratio statistics are deliberately windowed (separations comparable
    // to the stage) and are NOT accumulated: their decay is the signal.
    let mut run_fwd = f64::NEG_INFINITY;
    let mut run_rev = f64::NEG_INFINITY;
    for t_max in window.windows() {
        let grid = PairGrid::comparison(t_max);
        let mut ratio_fwd: Option<f64> = None;
        let mut ratio_rev: Option<f64> = None;
        for &(t, s) in &grid.forward {
            let dmu = mu.log_ratio(t, s);
            let dsig = sigma.log_ratio(t, s);
            run_fwd = run_fwd.max(dsig - dmu);
            run_rev = run_rev.max(dmu - dsig);
            if t - s >= 0.5 * t_max {
                if dmu >= RATIO_DLOG_MIN {
                    let r = dsig / dmu;
                    ratio_fwd = Some(ratio_fwd.map_or(r, |v: f64| v.max(r)));
                }
                if dsig >= RATIO_DLOG_MIN {
                    let r = dmu / dsig;
                    ratio_rev = Some(ratio_rev.map_or(r, |v: f64| v.max(r)));
                }
            }
        }
        data.pairs += grid.forward.len();
        data.sup_fwd.push(run_fwd);
        data.sup_rev.push(run_rev);
        if let Some(r) = ratio_fwd {
            data.ratio_fwd.push(r);
        }
        if let Some(r) = ratio_rev {
            data.ratio_rev.push(r);
        }
    }
    data
}

fn final_increment(stages: &[f64]) -> f64 {
    match stages.len() {
        0 | 1 => f64::NAN,
        n => stages[n - 1] - stages[n - 2],
    }
}

/// True when a ratio sequence has settled to a nonzero level.
fn ratio_plateaus(stages: &[f64]) -> bool {
    let n = stages.len();
    if n < 3 {
        return false;
    }
    let (last, prev) = (stages[n - 1], stages[n - 2]);
    last > STRONG_RATIO_THRESHOLD && (last - prev).abs() <= 0.05 * last.abs().max(0.05)
}

/// Decide whether `mu` is weakly faster or weakly slower than `sigma`.
///
/// The statistic `S(T) = sup { dlog sigma - dlog mu : t >= s in [-T,T] }` is
/// tracked over doubling windows; a plateau certifies `sigma(t)/sigma(s) <=
/// e^S mu(t)/mu(s)` on everything sampled, which is reported as weakly faster
/// with `log M = S`.
pub fn compare_weak(
    mu: &GrowthRate,
    sigma: &GrowthRate,
    window: &WindowSchedule,
) -> CoreResult<ComparisonVerdict> {
    let data = sweep(mu, sigma, window);
    let fwd = classify_sweep(&data.sup_fwd, PLATEAU_TOL, DIVERGENCE_LOG_THRESHOLD);
    let rev = classify_sweep(&data.sup_rev, PLATEAU_TOL, DIVERGENCE_LOG_THRESHOLD);

    let (relation, constant, stages) = match (fwd, rev) {
        (SweepTrend::Plateau, _) => (
            Relation::WeaklyFaster,
            Some(*data.sup_fwd.last().unwrap()),
            data.sup_fwd.clone(),
        ),
        (_, SweepTrend::Plateau) => (
            Relation::WeaklySlower,
            Some(*data.sup_rev.last().unwrap()),
            data.sup_rev.clone(),
        ),
        (SweepTrend::Diverging, SweepTrend::Diverging) => {
            (Relation::Incomparable, None, data.sup_fwd.clone())
        }
        _ => (Relation::Inconclusive, None, data.sup_fwd.clone()),
    };
    Ok(ComparisonVerdict {
        relation,
        constant_estimate: constant,
        evidence: Evidence {
            pairs_evaluated: data.pairs,
            final_window: data.final_window,
            final_increment: final_increment(&stages),
            stage_values: stages,
        },
    })
}

/// Decide whether `mu` is faster or slower than `sigma` in the strict sense.
pub fn compare_strong(
    mu: &GrowthRate,
    sigma: &GrowthRate,
    window: &WindowSchedule,
) -> CoreResult<ComparisonVerdict> {
    let data = sweep(mu, sigma, window);
    let weak_fwd = classify_sweep(&data.sup_fwd, PLATEAU_TOL, DIVERGENCE_LOG_THRESHOLD)
        == SweepTrend::Plateau;
    let weak_rev = classify_sweep(&data.sup_rev, PLATEAU_TOL, DIVERGENCE_LOG_THRESHOLD)
        == SweepTrend::Plateau;

    let faster = weak_fwd && decays_below(&data.ratio_fwd, STRONG_RATIO_THRESHOLD, 1e-9);
    let slower = weak_rev && decays_below(&data.ratio_rev, STRONG_RATIO_THRESHOLD, 1e-9);

    let (relation, constant, stages) = match (faster, slower) {
        (true, false) => (
            Relation::Faster,
            Some(*data.sup_fwd.last().unwrap()),
            data.ratio_fwd.clone(),
        ),
        (false, true) => (
            Relation::Slower,
            Some(*data.sup_rev.last().unwrap()),
            data.ratio_rev.clone(),
        ),
        _ => {
            if ratio_plateaus(&data.ratio_fwd) && ratio_plateaus(&data.ratio_rev) {
                (Relation::Incomparable, None, data.ratio_fwd.clone())
            } else {
                (Relation::Inconclusive, None, data.ratio_fwd.clone())
            }
        }
    };
    Ok(ComparisonVerdict {
        relation,
        constant_estimate: constant,
        evidence: Evidence {
            pairs_evaluated: data.pairs,
            final_window: data.final_window,
            final_increment: final_increment(&stages),
            stage_values: stages,
        },
    })
}

/// Witness exponents tried by [`classify`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExponentGrid {
    /// Subexponential witnesses in (0, 1).
    pub slow: Vec<f64>,
    /// Superexponential witnesses in (1, inf).
    pub fast: Vec<f64>,
}

impl Default for ExponentGrid {
    fn default() -> Self {
        ExponentGrid {
            slow: vec![0.1, 0.25, 0.5, 0.75, 0.9],
            fast: vec![1.25, 1.5, 2.0, 3.0],
        }
    }
}

/// Slow/fast classification of a rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum RateClass {
    /// `rate` is weakly slower than the subexponential witness `u_r`.
    Slow { witness: f64 },
    /// `rate` is weakly faster than the superexponential witness `s_r`.
    Fast { witness: f64 },
    /// Weakly comparable with the exponential rate in both directions.
    ExponentialLike,
    Unclassified { diagnostic: String },
}

/// Classify a rate as slow, fast, exponential-like or unclassified.
pub fn classify(
    rate: &GrowthRate,
    grid: &ExponentGrid,
    window: &WindowSchedule,
) -> CoreResult<RateClass> {
    if grid.slow.is_empty() || grid.fast.is_empty() {
        return Err(CoreError::parameter(
            "exponent_grid",
            "needs at least one witness on each side of 1",
        ));
    }
    let mut slow_witness = None;
    for &r in &grid.slow {
        let u = GrowthRate::subexponential(r)?;
        if compare_weak(&u, rate, window)?.relation == Relation::WeaklyFaster {
            slow_witness = Some(r);
            break;
        }
    }
    let mut fast_witness = None;
    for &r in &grid.fast {
        let s = GrowthRate::superexponential(r)?;
        if compare_weak(rate, &s, window)?.relation == Relation::WeaklyFaster {
            fast_witness = Some(r);
            break;
        }
    }
    match (slow_witness, fast_witness) {
        (Some(r), None) => Ok(RateClass::Slow { witness: r }),
        (None, Some(r)) => Ok(RateClass::Fast { witness: r }),
        (Some(a), Some(b)) => Ok(RateClass::Unclassified {
            diagnostic: format!(
                "contradictory witnesses: slow via u_{a} and fast via s_{b}; \
                 slow and fast are mutually exclusive"
            ),
        }),
        (None, None) => {
            let e = GrowthRate::Exponential;
            let up = compare_weak(rate, &e, window)?.relation == Relation::WeaklyFaster;
            let down = compare_weak(&e, rate, window)?.relation == Relation::WeaklyFaster;
            if up && down {
                Ok(RateClass::ExponentialLike)
            } else {
                Ok(RateClass::Unclassified {
                    diagnostic: "no witness on the tested exponent grid".to_string(),
                })
            }
        }
    }
}

/// Limit behavior of `tau -> mu_tau(t)` along a diverging schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum TranslatedLimit {
    /// Values stabilized; `[min, max]` are the empirical bounds observed.
    FinitePositive { min: f64, max: f64 },
    DivergesToInfinity,
    DecaysToZero,
    Inconclusive,
}

/// Tolerance on consecutive log-value changes for the stabilization verdict.
pub const STABILIZE_TOL: f64 = 0.05;

/// Dyadic schedule `sign * 2^n` for `n` in `start..=end`.
pub fn dyadic_schedule(sign: f64, start: u32, end: u32) -> Vec<f64> {
    (start..=end).map(|n| sign * (1u64 << n) as f64).collect()
}

fn validate_schedule(schedule: &[f64]) -> CoreResult<()> {
    if schedule.len() < 8 {
        return Err(CoreError::parameter("tau_schedule", "needs at least 8 entries"));
    }
    let increasing = schedule.windows(2).all(|w| w[1] > w[0]);
    let decreasing = schedule.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(CoreError::parameter("tau_schedule", "must be strictly monotone"));
    }
    Ok(())
}

/// Evaluate `mu_tau(t)` in log-space along a diverging `tau` schedule and
/// report whether the values stabilize, blow up or vanish.
pub fn translated_limit_probe(
    rate: &GrowthRate,
    t: f64,
    tau_schedule: &[f64],
) -> CoreResult<TranslatedLimit> {
    if !t.is_finite() {
        return Err(CoreError::Domain(format!("non-finite t = {t}")));
    }
    validate_schedule(tau_schedule)?;
    if t == 0.0 {
        // mu_tau(0) = 1 exactly, for every rate and schedule.
        return Ok(TranslatedLimit::FinitePositive { min: 1.0, max: 1.0 });
    }
    let logs: Vec<f64> = tau_schedule
        .iter()
        .map(|&tau| rate.log_eval(t + tau) - rate.log_eval(tau))
        .collect();
    let n = logs.len();
    let tail = &logs[n - 4..];
    let monotone_up = tail.windows(2).all(|w| w[1] >= w[0]);
    let monotone_down = tail.windows(2).all(|w| w[1] <= w[0]);
    let last = logs[n - 1];
    if last > DIVERGENCE_LOG_THRESHOLD && monotone_up {
        return Ok(TranslatedLimit::DivergesToInfinity);
    }
    if last < -DIVERGENCE_LOG_THRESHOLD && monotone_down {
        return Ok(TranslatedLimit::DecaysToZero);
    }
    let max_step = logs[n - 4..]
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0_f64, f64::max);
    if max_step < STABILIZE_TOL {
        let lo = logs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        return Ok(TranslatedLimit::FinitePositive {
            min: lo.exp(),
            max: hi.exp(),
        });
    }
    Ok(TranslatedLimit::Inconclusive)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w() -> WindowSchedule {
        WindowSchedule::comparison_default()
    }

    #[test]
    fn exponential_weakly_faster_than_polynomial() {
        let v = compare_weak(&GrowthRate::Exponential, &GrowthRate::Polynomial, &w()).unwrap();
        assert_eq!(v.relation, Relation::WeaklyFaster);
        assert!(v.constant_estimate.unwrap() >= 0.0);
        assert!(v.constant_estimate.unwrap() < 1e-9);
    }

    #[test]
    fn weak_comparison_is_reflexive_with_unit_constant() {
        let v = compare_weak(&GrowthRate::Polynomial, &GrowthRate::Polynomial, &w()).unwrap();
        assert_eq!(v.relation, Relation::WeaklyFaster);
        assert_eq!(v.constant_estimate.unwrap(), 0.0);
    }

    #[test]
    fn squared_rate_weakly_faster_but_not_faster() {
        let mu = GrowthRate::Exponential;
        let mu2 = GrowthRate::Exponential.power(2.0).unwrap();
        let weak = compare_weak(&mu2, &mu, &w()).unwrap();
        assert_eq!(weak.relation, Relation::WeaklyFaster);
        let rev = compare_weak(&mu, &mu2, &w()).unwrap();
        assert_eq!(rev.relation, Relation::WeaklySlower);
        let strong = compare_strong(&mu2, &mu, &w()).unwrap();
        assert!(
            strong.relation == Relation::Incomparable
                || strong.relation == Relation::Inconclusive,
            "got {:?}",
            strong.relation
        );
    }

    #[test]
    fn strong_ordering_exponential_vs_polynomial() {
        let v = compare_strong(&GrowthRate::Exponential, &GrowthRate::Polynomial, &w()).unwrap();
        assert_eq!(v.relation, Relation::Faster);
        let r = compare_strong(&GrowthRate::Polynomial, &GrowthRate::Exponential, &w()).unwrap();
        assert_eq!(r.relation, Relation::Slower);
    }

    #[test]
    fn strong_ordering_within_superexponential_family() {
        let s3 = GrowthRate::superexponential(3.0).unwrap();
        let s2 = GrowthRate::superexponential(2.0).unwrap();
        let v = compare_strong(&s3, &s2, &w()).unwrap();
        assert_eq!(v.relation, Relation::Faster);
    }

    #[test]
    fn verdicts_never_both_faster_and_slower() {
        let rates = [
            GrowthRate::Polynomial,
            GrowthRate::Exponential,
            GrowthRate::subexponential(0.5).unwrap(),
            GrowthRate::superexponential(1.5).unwrap(),
        ];
        for a in &rates {
            for b in &rates {
                let ab = compare_strong(a, b, &w()).unwrap().relation;
                let ba = compare_strong(b, a, &w()).unwrap().relation;
                assert!(
                    !(ab == Relation::Faster && ba == Relation::Faster),
                    "{a:?} vs {b:?}"
                );
                if ab == Relation::Faster {
                    assert_eq!(ba, Relation::Slower, "{a:?} vs {b:?}");
                }
            }
        }
    }

    #[test]
    fn classify_catalog() {
        let g = ExponentGrid::default();
        assert!(matches!(
            classify(&GrowthRate::Polynomial, &g, &w()).unwrap(),
            RateClass::Slow { .. }
        ));
        assert!(matches!(
            classify(&GrowthRate::quadratic(), &g, &w()).unwrap(),
            RateClass::Fast { .. }
        ));
        assert_eq!(
            classify(&GrowthRate::Exponential, &g, &w()).unwrap(),
            RateClass::ExponentialLike
        );
    }

    #[test]
    fn classify_rejects_empty_grid() {
        let g = ExponentGrid {
            slow: vec![],
            fast: vec![2.0],
        };
        assert!(classify(&GrowthRate::Polynomial, &g, &w()).is_err());
    }

    #[test]
    fn translated_limits_subexponential_stay_finite() {
        let u = GrowthRate::subexponential(0.5).unwrap();
        let sched = dyadic_schedule(1.0, 3, 12);
        match translated_limit_probe(&u, 1.0, &sched).unwrap() {
            TranslatedLimit::FinitePositive { min, max } => {
                assert!(min > 0.0 && max.is_finite() && min <= max);
            }
            other => panic!("expected FinitePositive, got {other:?}"),
        }
    }

    #[test]
    fn translated_limits_superexponential_blow_up() {
        let q = GrowthRate::quadratic();
        let sched = dyadic_schedule(1.0, 3, 12);
        assert_eq!(
            translated_limit_probe(&q, 1.0, &sched).unwrap(),
            TranslatedLimit::DivergesToInfinity
        );
        assert_eq!(
            translated_limit_probe(&q, -1.0, &sched).unwrap(),
            TranslatedLimit::DecaysToZero
        );
    }

    #[test]
    fn translated_limit_at_zero_is_exact() {
        let sched = dyadic_schedule(-1.0, 3, 12);
        assert_eq!(
            translated_limit_probe(&GrowthRate::quadratic(), 0.0, &sched).unwrap(),
            TranslatedLimit::FinitePositive { min: 1.0, max: 1.0 }
        );
    }

    #[test]
    fn schedule_validation() {
        let short = vec![1.0, 2.0, 3.0];
        assert!(translated_limit_probe(&GrowthRate::Exponential, 1.0, &short).is_err());
        let wobble = vec![1.0, 2.0, 1.5, 3.0, 4.0, 5.0, 6.0, 7.0];
        assert!(translated_limit_probe(&GrowthRate::Exponential, 1.0, &wobble).is_err());
    }
}
