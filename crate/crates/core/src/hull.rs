//! Translation-orbit probes and limit-behavior classification.
//!
//! The hull of a coefficient `omega` is the closure of its translation orbit
//! `{omega(. + tau)}`. Instead of constructing a hull topology, the probes
//! here test the one consequence every admissible topology shares:
//! convergence along a diverging schedule implies pointwise convergence on
//! compacts. Predictions derived from certificates (empty limit sets under
//! fast rates, bounded limit equations under slow growth, spectral collapse,
//! periodic spectral trichotomy) are then cross-checked against the probes;
//! a disagreement is recorded as a falsification, never dropped.

use serde::{Deserialize, Serialize};

use crate::compare::{classify, dyadic_schedule, ExponentGrid, RateClass};
use crate::dichotomy::{
    subbundle_probe, verify_dichotomy, verify_growth, DichotomyCertificate, GrowthCertificate,
};
use crate::error::{CoreError, CoreResult};
use crate::evolution::spectral_norm;
use crate::grid::{linear_grid, WindowSchedule};
use crate::rate::GrowthRate;
use crate::spectrum::{estimate_spectrum, ExtendedReal, SpectrumEstimate};
use crate::system::{LinearSystem, ScalarTable};

/// Default Cauchy tolerance for pointwise convergence.
pub const CAUCHY_TOL: f64 = 1e-6;
/// Magnitude past which a pointwise value counts toward divergence.
pub const POINTWISE_DIVERGENCE_THRESHOLD: f64 = 1e3;
/// Endpoint tolerance for the spectral cross-checks of the classifier.
pub const CLASSIFY_SPECTRUM_TOL: f64 = 5e-2;

/// A translation-orbit probe: which coefficient, along which diverging
/// schedule, sampled on which compact window.
#[derive(Clone, Debug)]
pub struct OrbitProbe<'a> {
    pub system: &'a LinearSystem,
    pub tau_schedule: Vec<f64>,
    pub compact_radius: f64,
    pub grid_points: usize,
}

impl<'a> OrbitProbe<'a> {
    pub fn new(
        system: &'a LinearSystem,
        tau_schedule: Vec<f64>,
        compact_radius: f64,
        grid_points: usize,
    ) -> CoreResult<Self> {
        if tau_schedule.len() < 8 {
            return Err(CoreError::parameter("tau_schedule", "needs at least 8 entries"));
        }
        let inc = tau_schedule.windows(2).all(|w| w[1] > w[0]);
        let dec = tau_schedule.windows(2).all(|w| w[1] < w[0]);
        if !(inc || dec) {
            return Err(CoreError::parameter("tau_schedule", "must be strictly monotone"));
        }
        if !(compact_radius > 0.0 && compact_radius.is_finite()) {
            return Err(CoreError::parameter("compact_radius", "must be finite and > 0"));
        }
        if grid_points < 2 {
            return Err(CoreError::parameter("grid_points", "needs at least 2 points"));
        }
        Ok(OrbitProbe {
            system,
            tau_schedule,
            compact_radius,
            grid_points,
        })
    }
}

/// Sampled limit function on `[-T, T]`: row-major coefficient entries per
/// grid point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LimitSamples {
    pub grid: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub dimension: usize,
}

impl LimitSamples {
    /// Largest entry magnitude of the sampled limit.
    pub fn sup_abs(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Rebuild a scalar system from the samples by linear interpolation.
    pub fn to_scalar_system(&self, label: &str) -> CoreResult<LinearSystem> {
        if self.dimension != 1 {
            return Err(CoreError::Unsupported(
                "limit-system reconstruction is implemented for scalar coefficients".into(),
            ));
        }
        let samples = self
            .grid
            .iter()
            .zip(&self.values)
            .map(|(&t, v)| (t, v[0]))
            .collect();
        Ok(LinearSystem::scalar_table(ScalarTable::new(samples)?, label))
    }
}

/// Verdict of a pointwise-on-compacts limit probe.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum LimitVerdict {
    ConvergentTo { limit: LimitSamples },
    DivergesPointwise,
    NonCauchy,
}

impl LimitVerdict {
    pub fn is_convergent(&self) -> bool {
        matches!(self, LimitVerdict::ConvergentTo { .. })
    }
}

/// Full report of one pointwise limit probe.
#[derive(Clone, Debug, Serialize)]
pub struct LimitProbeReport {
    pub verdict: LimitVerdict,
    /// Sup-distances on the compact window between consecutive translates.
    pub sup_distances: Vec<f64>,
    pub notes: Vec<String>,
}

fn snapshot(system: &LinearSystem, tau: f64, grid: &[f64]) -> CoreResult<Vec<Vec<f64>>> {
    grid.iter()
        .map(|&t| {
            let m = system.coefficient_at(t + tau);
            let entries: Vec<f64> = m.iter().cloned().collect();
            if entries.iter().any(|v| !v.is_finite()) {
                return Err(CoreError::Input(format!(
                    "coefficient evaluation failed at t = {}",
                    t + tau
                )));
            }
            Ok(entries)
        })
        .collect()
}

/// Probe `omega(. + tau_n)` for pointwise convergence on `[-T, T]`.
pub fn pointwise_limit_probe(probe: &OrbitProbe, cauchy_tol: f64) -> CoreResult<LimitProbeReport> {
    let grid = linear_grid(-probe.compact_radius, probe.compact_radius, probe.grid_points);
    let snapshots: Vec<Vec<Vec<f64>>> = probe
        .tau_schedule
        .iter()
        .map(|&tau| snapshot(probe.system, tau, &grid))
        .collect::<CoreResult<_>>()?;
    let n = snapshots.len();
    let sup_distances: Vec<f64> = (1..n)
        .map(|k| {
            snapshots[k]
                .iter()
                .flatten()
                .zip(snapshots[k - 1].iter().flatten())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        })
        .collect();

    let tail = &sup_distances[sup_distances.len() - 3..];
    let cauchy = tail.iter().all(|&d| d < cauchy_tol) && tail.windows(2).all(|w| w[1] <= w[0]);
    if cauchy {
        let dim = probe.system.dimension();
        return Ok(LimitProbeReport {
            verdict: LimitVerdict::ConvergentTo {
                limit: LimitSamples {
                    grid,
                    values: snapshots[n - 1].clone(),
                    dimension: dim,
                },
            },
            sup_distances,
            notes: Vec::new(),
        });
    }

    // Divergence must hold at every grid point, with a monotone tail.
    let points = grid.len();
    let mut diverges_everywhere = true;
    for p in 0..points {
        let mags: Vec<f64> = snapshots
            .iter()
            .map(|snap| snap[p].iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .collect();
        let m = mags.len();
        let ok = mags[m - 1] > POINTWISE_DIVERGENCE_THRESHOLD
            && mags[m - 1] >= mags[m - 2]
            && mags[m - 2] >= mags[m - 3];
        if !ok {
            diverges_everywhere = false;
            break;
        }
    }
    let verdict = if diverges_everywhere {
        LimitVerdict::DivergesPointwise
    } else {
        LimitVerdict::NonCauchy
    };
    Ok(LimitProbeReport {
        verdict,
        sup_distances,
        notes: Vec::new(),
    })
}

/// Report of a uniform-local-integrability sweep.
#[derive(Clone, Debug, Serialize)]
pub struct UliReport {
    /// `(tau, (1/t0) int_tau^{tau+t0} ||omega||)` per window, in sweep order.
    pub window_values: Vec<(f64, f64)>,
    /// Running sup of the window means.
    pub sup_estimate: f64,
    /// True when the running sup keeps growing with a monotone tail.
    pub unbounded: bool,
}

fn scalar_zeros(system: &LinearSystem, lo: f64, hi: f64) -> Vec<f64> {
    let Some(channels) = system.channels() else {
        return Vec::new();
    };
    if channels.len() != 1 {
        return Vec::new();
    }
    let ch = channels[0];
    let n = 512;
    let mut zeros = Vec::new();
    let h = (hi - lo) / n as f64;
    let mut prev = ch.eval(lo);
    for i in 1..=n {
        let x = lo + h * i as f64;
        let cur = ch.eval(x);
        if prev == 0.0 {
            zeros.push(x - h);
        } else if prev * cur < 0.0 {
            let (mut a, mut b) = (x - h, x);
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                if ch.eval(a) * ch.eval(mid) <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            zeros.push(0.5 * (a + b));
        }
        prev = cur;
    }
    zeros
}

fn window_mean(system: &LinearSystem, tau: f64, t0: f64) -> f64 {
    let (lo, hi) = (tau, tau + t0);
    // ||omega|| has kinks at sign changes of a scalar coefficient; splitting
    // there keeps the quadrature at full order.
    let mut cuts = vec![lo, hi];
    if lo < 0.0 && hi > 0.0 {
        cuts.push(0.0);
    }
    cuts.extend(scalar_zeros(system, lo, hi));
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let norm_at = |t: f64| -> f64 {
        let m = system.coefficient_at(t);
        if m.nrows() == 1 && m.ncols() == 1 {
            m[(0, 0)].abs()
        } else {
            spectral_norm(&m)
        }
    };
    let mut total = 0.0;
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let panels = (((b - a) / t0 * 1024.0).ceil() as usize).max(8);
        let h = (b - a) / panels as f64;
        for i in 0..panels {
            let x0 = a + h * i as f64;
            let x1 = x0 + h;
            let xm = 0.5 * (x0 + x1);
            total += h / 6.0 * (norm_at(x0) + 4.0 * norm_at(xm) + norm_at(x1));
        }
    }
    total / t0
}

/// Windowed means `(1/t0) int_tau^{tau+t0} ||omega(s)|| ds` over a grid of
/// window anchors, with the running sup and a growth verdict.
pub fn uniform_local_integrability(
    system: &LinearSystem,
    t0: f64,
    tau_grid: &[f64],
) -> CoreResult<UliReport> {
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(CoreError::parameter("t0", "window length must be finite and > 0"));
    }
    if tau_grid.len() < 4 {
        return Err(CoreError::parameter("tau_grid", "needs at least 4 anchors"));
    }
    let mut anchors = tau_grid.to_vec();
    anchors.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
    let mut window_values = Vec::with_capacity(anchors.len());
    let mut sups = Vec::with_capacity(anchors.len());
    let mut sup = f64::NEG_INFINITY;
    for &tau in &anchors {
        let v = window_mean(system, tau, t0);
        if !v.is_finite() {
            return Err(CoreError::Input(format!(
                "coefficient norm not integrable on [{tau}, {}]",
                tau + t0
            )));
        }
        sup = sup.max(v);
        window_values.push((tau, v));
        sups.push(sup);
    }
    let n = sups.len();
    let tail = &sups[n - n / 2..];
    let growing = tail.windows(2).all(|w| w[1] >= w[0]) && tail[tail.len() - 1] > tail[0] + 1.0;
    Ok(UliReport {
        window_values,
        sup_estimate: sup,
        unbounded: growing,
    })
}

/// Default expanding two-sided anchor grid for the integrability sweep.
pub fn default_uli_grid() -> Vec<f64> {
    let mut g = vec![0.0];
    for k in 0..=13 {
        let x = (1u64 << k) as f64;
        g.push(x);
        g.push(-x);
    }
    g
}

/// Report of a bounded-solutions probe on a (limit) system.
#[derive(Clone, Debug, Serialize)]
pub struct BoundedSolutionsReport {
    pub all_bounded: bool,
    /// Directions with growth that was neither clearly bounded nor diverging.
    pub ambiguous: Vec<usize>,
    pub max_log_norm: f64,
}

/// True iff every basis solution stays below the plateau threshold on
/// `[-T, T]`; by the trivial-bounded-subbundle property this certifies that
/// the system cannot carry any dichotomy.
pub fn bounded_solutions_probe(
    system: &LinearSystem,
    horizon: f64,
    basis: Option<&[nalgebra::DVector<f64>]>,
) -> CoreResult<BoundedSolutionsReport> {
    let report = subbundle_probe(system, horizon, basis)?;
    Ok(BoundedSolutionsReport {
        all_bounded: report.bounded_dim == system.dimension() && report.ambiguous.is_empty(),
        ambiguous: report.ambiguous,
        max_log_norm: report.max_log_norm,
    })
}

/// Theorem-level predictions about the limit behavior of an orbit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitPrediction {
    EmptyLimitSets,
    LimitEquationsAllBounded,
    NoDichotomyOnHull,
    SpectrumCollapsesToZero,
    SpectralIntervalsOnlyZeroOrInfinity,
}

/// A prediction together with the witnesses that produced it.
#[derive(Clone, Debug, Serialize)]
pub struct PredictionRecord {
    pub prediction: LimitPrediction,
    pub witnesses: Vec<String>,
}

/// Optional certificates feeding the classifier.
#[derive(Clone, Debug, Default)]
pub struct HullCertificates {
    pub dichotomy: Option<DichotomyCertificate>,
    pub growth: Option<GrowthCertificate>,
}

/// Configuration of the classifier's probes and cross-checks.
#[derive(Clone, Debug)]
pub struct ClassifyConfig {
    pub compact_radius: f64,
    pub grid_points: usize,
    pub schedule_forward: Vec<f64>,
    pub schedule_backward: Vec<f64>,
    pub cauchy_tol: f64,
    pub bounded_horizon: f64,
    pub uli_t0: f64,
    pub uli_tau_grid: Vec<f64>,
    /// Fast rate used by the exponential-growth collapse rule.
    pub fast_rate_query: Option<GrowthRate>,
    /// Slow rate used by the periodic trichotomy rule.
    pub slow_rate_query: Option<GrowthRate>,
    pub comparison_window: WindowSchedule,
    pub spectrum_window: WindowSchedule,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            compact_radius: 10.0,
            grid_points: 201,
            // The schedules reach 2^26: a 1e-6 Cauchy tolerance needs tails
            // far beyond the coefficient decay scale of the catalog examples.
            schedule_forward: dyadic_schedule(1.0, 3, 26),
            schedule_backward: dyadic_schedule(-1.0, 3, 26),
            cauchy_tol: CAUCHY_TOL,
            bounded_horizon: 20.0,
            uli_t0: 1.0,
            uli_tau_grid: default_uli_grid(),
            fast_rate_query: Some(GrowthRate::quadratic()),
            slow_rate_query: Some(GrowthRate::Polynomial),
            comparison_window: WindowSchedule::comparison_default(),
            spectrum_window: WindowSchedule::bohl_default(),
        }
    }
}

/// Assembled classification: predictions, witnesses, probe reports and any
/// falsifications found by cross-checking.
#[derive(Clone, Debug, Serialize)]
pub struct LimitClassification {
    pub predictions: Vec<PredictionRecord>,
    pub falsifications: Vec<String>,
    pub notes: Vec<String>,
    /// Set when no rule fired: the input carries no usable certificate and
    /// its rate class is outside the analyzed families.
    pub unclassified_input: bool,
    pub forward: LimitProbeReport,
    pub backward: LimitProbeReport,
    pub uli: UliReport,
}

fn add_prediction(records: &mut Vec<PredictionRecord>, p: LimitPrediction, witness: String) {
    if let Some(r) = records.iter_mut().find(|r| r.prediction == p) {
        r.witnesses.push(witness);
    } else {
        records.push(PredictionRecord {
            prediction: p,
            witnesses: vec![witness],
        });
    }
}

fn spectrum_is_zero_singleton(est: &SpectrumEstimate, tol: f64) -> bool {
    est.intervals.len() == 1
        && matches!(est.intervals[0].lo, ExtendedReal::Finite(x) if x.abs() <= tol)
        && matches!(est.intervals[0].hi, ExtendedReal::Finite(x) if x.abs() <= tol)
}

fn interval_is_trichotomy(iv: &crate::spectrum::SpectralInterval, tol: f64) -> bool {
    use ExtendedReal::*;
    match (iv.lo, iv.hi) {
        (PosInfinity, PosInfinity) | (NegInfinity, NegInfinity) => true,
        (Finite(a), Finite(b)) => a.abs() <= tol && b.abs() <= tol,
        _ => false,
    }
}

/// Run the decision procedure and its cross-checks, reporting predictions,
/// witnesses, and any falsifications.
pub fn classify_limit_behavior(
    system: &LinearSystem,
    certificates: &HullCertificates,
    config: &ClassifyConfig,
) -> CoreResult<LimitClassification> {
    let mut notes = Vec::new();
    let mut falsifications = Vec::new();
    let mut records: Vec<PredictionRecord> = Vec::new();

    // Supplied certificates must verify on the supplied system.
    let grid = crate::grid::PairGrid::verification(30.0, 14, 28);
    if let Some(cert) = &certificates.dichotomy {
        let rep = verify_dichotomy(system, cert, &grid)?;
        if !rep.pass {
            return Err(CoreError::Input(format!(
                "supplied dichotomy certificate fails verification (margin {:.3e})",
                rep.worst_margin
            )));
        }
    }
    if let Some(cert) = &certificates.growth {
        let rep = verify_growth(system, cert, &grid)?;
        if !rep.pass {
            return Err(CoreError::Input(format!(
                "supplied growth certificate fails verification (margin {:.3e})",
                rep.worst_margin
            )));
        }
    }

    let exponents = ExponentGrid::default();
    let dichotomy_class = certificates
        .dichotomy
        .as_ref()
        .map(|c| classify(c.rate(), &exponents, &config.comparison_window))
        .transpose()?;
    let growth_class = certificates
        .growth
        .as_ref()
        .map(|c| classify(&c.rate, &exponents, &config.comparison_window))
        .transpose()?;

    // Probes.
    let fwd_probe = OrbitProbe::new(
        system,
        config.schedule_forward.clone(),
        config.compact_radius,
        config.grid_points,
    )?;
    let bwd_probe = OrbitProbe::new(
        system,
        config.schedule_backward.clone(),
        config.compact_radius,
        config.grid_points,
    )?;
    let forward = pointwise_limit_probe(&fwd_probe, config.cauchy_tol)?;
    let backward = pointwise_limit_probe(&bwd_probe, config.cauchy_tol)?;
    let uli = uniform_local_integrability(system, config.uli_t0, &config.uli_tau_grid)?;

    // Rule: uniform dichotomy under a fast rate forbids limit points.
    if let (Some(cert), Some(class)) = (&certificates.dichotomy, &dichotomy_class) {
        if cert.is_uniform() {
            if let RateClass::Fast { witness } = class {
                add_prediction(
                    &mut records,
                    LimitPrediction::EmptyLimitSets,
                    format!("uniform dichotomy under a fast rate (witness s_{witness})"),
                );
            }
        }
    }
    // Rule: uniform growth under a slow rate bounds every limit equation,
    // which precludes dichotomies on the hull and collapses its exponential
    // spectrum to zero.
    let mut spectrum_zero_rates: Vec<(GrowthRate, String)> = Vec::new();
    if let (Some(cert), Some(class)) = (&certificates.growth, &growth_class) {
        if cert.is_uniform() {
            if let RateClass::Slow { witness } = class {
                let w = format!("uniform growth under a slow rate (witness u_{witness})");
                add_prediction(
                    &mut records,
                    LimitPrediction::LimitEquationsAllBounded,
                    w.clone(),
                );
                add_prediction(&mut records, LimitPrediction::NoDichotomyOnHull, w.clone());
                add_prediction(&mut records, LimitPrediction::SpectrumCollapsesToZero, w.clone());
                spectrum_zero_rates.push((GrowthRate::Exponential, w));
            }
            // Rule: exponential bounded growth collapses every fast-rate
            // spectrum on the hull to {0}.
            if matches!(class, RateClass::ExponentialLike) {
                if let Some(fast) = &config.fast_rate_query {
                    let w = format!(
                        "exponential bounded growth; fast-rate query {fast:?}"
                    );
                    add_prediction(
                        &mut records,
                        LimitPrediction::SpectrumCollapsesToZero,
                        w.clone(),
                    );
                    spectrum_zero_rates.push((fast.clone(), w));
                }
            }
        }
    }
    // Rule: failing uniform local integrability forbids limiting equations.
    if uli.unbounded {
        add_prediction(
            &mut records,
            LimitPrediction::EmptyLimitSets,
            format!(
                "uniform local integrability fails (running sup {:.3e} and growing)",
                uli.sup_estimate
            ),
        );
    }
    // Rule: periodic coefficient plus a slow rate restricts the spectral
    // intervals to {0}, {+inf}, {-inf}.
    let mut trichotomy_rate = None;
    if system.is_periodic() {
        let slow_rate = match (&certificates.dichotomy, &dichotomy_class) {
            (Some(c), Some(RateClass::Slow { .. })) => Some(c.rate().clone()),
            _ => config.slow_rate_query.clone(),
        };
        if let Some(rate) = slow_rate {
            match classify(&rate, &exponents, &config.comparison_window)? {
                RateClass::Slow { .. } => {
                    add_prediction(
                        &mut records,
                        LimitPrediction::SpectralIntervalsOnlyZeroOrInfinity,
                        format!("periodic coefficient with slow rate {rate:?}"),
                    );
                    trichotomy_rate = Some(rate);
                }
                other => notes.push(format!(
                    "periodic rule skipped: query rate {rate:?} classified as {other:?}"
                )),
            }
        }
    }

    let unclassified_input = records.is_empty();
    if unclassified_input {
        notes.push(
            "no rule fired: no usable certificate and no analyzed rate class; \
             the catalog of slow/fast/exponential behaviors is not exhaustive"
                .to_string(),
        );
    }

    // Cross-checks.
    let predicted = |records: &[PredictionRecord], p: LimitPrediction| {
        records.iter().any(|r| r.prediction == p)
    };
    if predicted(&records, LimitPrediction::EmptyLimitSets) {
        if forward.verdict.is_convergent() {
            falsifications.push(
                "EmptyLimitSets predicted, but the omega-direction probe converged".to_string(),
            );
        }
        if backward.verdict.is_convergent() {
            falsifications.push(
                "EmptyLimitSets predicted, but the alpha-direction probe converged".to_string(),
            );
        }
    }
    let mut limit_bounded: Option<bool> = None;
    if predicted(&records, LimitPrediction::LimitEquationsAllBounded)
        || predicted(&records, LimitPrediction::NoDichotomyOnHull)
    {
        for (name, probe) in [("omega", &forward), ("alpha", &backward)] {
            match &probe.verdict {
                LimitVerdict::ConvergentTo { limit } => {
                    if system.is_scalar() {
                        let limit_system = limit.to_scalar_system("limit-equation")?;
                        let rep = bounded_solutions_probe(
                            &limit_system,
                            config.bounded_horizon,
                            None,
                        )?;
                        limit_bounded =
                            Some(limit_bounded.unwrap_or(true) && rep.all_bounded);
                        if !rep.all_bounded {
                            falsifications.push(format!(
                                "bounded limit equations predicted, but a {name}-limit solution \
                                 grows past the plateau threshold"
                            ));
                        }
                    } else {
                        notes.push(format!(
                            "{name}-limit bounded-solutions check skipped (non-scalar system)"
                        ));
                    }
                }
                _ => falsifications.push(format!(
                    "bounded limit equations predicted, but the {name}-direction probe did not \
                     converge"
                )),
            }
        }
    }
    if !spectrum_zero_rates.is_empty() && system.channels().is_some() && system.has_closed_form() {
        for (rate, witness) in &spectrum_zero_rates {
            let est = estimate_spectrum(system, rate, &config.spectrum_window)?;
            if !spectrum_is_zero_singleton(&est, CLASSIFY_SPECTRUM_TOL) {
                falsifications.push(format!(
                    "spectral collapse predicted ({witness}), but the estimate under {rate:?} \
                     is {:?}",
                    est.intervals
                ));
            }
        }
    } else if !spectrum_zero_rates.is_empty() {
        notes.push("spectral collapse cross-check skipped (no closed-form channels)".into());
    }
    if let Some(rate) = &trichotomy_rate {
        if system.has_closed_form() {
            let est = estimate_spectrum(system, rate, &config.spectrum_window)?;
            if !est
                .intervals
                .iter()
                .all(|iv| interval_is_trichotomy(iv, CLASSIFY_SPECTRUM_TOL))
            {
                falsifications.push(format!(
                    "periodic trichotomy predicted, but the spectrum under {rate:?} is {:?}",
                    est.intervals
                ));
            }
        }
    }
    let _ = limit_bounded;

    Ok(LimitClassification {
        predictions: records,
        falsifications,
        notes,
        unclassified_input,
        forward,
        backward,
        uli,
    })
}
