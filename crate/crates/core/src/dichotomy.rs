//! Dichotomy and bounded-growth certificates: verification, propagation,
//! fitting, and subbundle probes.
//!
//! A nonuniform mu-dichotomy with parameters `(P; K, alpha, beta, theta, nu)`
//! asserts, for an invariant projector `P`,
//!
//! ```text
//! ||Phi(t,s) P(s)||        <= K (mu(t)/mu(s))^alpha mu(s)^{sgn(s) theta}   for t >= s,
//! ||Phi(t,s) (Id - P(s))|| <= K (mu(t)/mu(s))^beta  mu(s)^{sgn(s) nu}      for t <= s,
//! ```
//!
//! with `K >= 1`, `alpha < 0 < beta`, `theta, nu >= 0`, `alpha + theta < 0`
//! and `beta - nu > 0`. When `P = 0` the first line is vacuous and `alpha,
//! theta` are absent; when `P = Id` the second line is vacuous and `beta, nu`
//! are absent (the asterisk convention). All checks run in log-space, where
//! the ratio inequalities become additive and overflow-free.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{CoreError, CoreResult};
use crate::evolution::{spectral_norm, EvolutionOperator};
use crate::grid::{classify_sweep, linear_grid, sgn, PairGrid, SweepTrend, WindowSchedule, PLATEAU_TOL};
use crate::rate::{translate, GrowthRate};
use crate::system::LinearSystem;

/// Margin tolerance for closed-form evolution.
pub const VERIFY_TOL_CLOSED: f64 = 1e-9;
/// Margin tolerance for numeric evolution.
pub const VERIFY_TOL_NUMERIC: f64 = 1e-5;
/// Idempotence tolerance for projectors.
pub const PROJECTOR_IDEMPOTENCE_TOL: f64 = 1e-10;
/// Relative invariance tolerance for projectors.
pub const PROJECTOR_INVARIANCE_TOL: f64 = 1e-6;
/// A direction whose log-norm exceeds this with positive trend is diverging.
pub const SUBBUNDLE_LOG_THRESHOLD: f64 = 6.907755278982137; // ln(1e3)

pub type ProjectorFn = Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;

/// Invariant projector of a dichotomy.
#[derive(Clone)]
pub enum Projector {
    Zero,
    Identity,
    ConstantMatrix(DMatrix<f64>),
    TimeVarying(ProjectorFn),
}

impl fmt::Debug for Projector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Projector::Zero => write!(f, "Zero"),
            Projector::Identity => write!(f, "Identity"),
            Projector::ConstantMatrix(m) => write!(f, "ConstantMatrix({}x{})", m.nrows(), m.ncols()),
            Projector::TimeVarying(_) => write!(f, "TimeVarying(..)"),
        }
    }
}

impl Projector {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Projector::Zero => "zero",
            Projector::Identity => "identity",
            Projector::ConstantMatrix(_) => "constant-matrix",
            Projector::TimeVarying(_) => "time-varying",
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Projector::Zero)
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Projector::Identity)
    }

    pub fn at(&self, s: f64, dim: usize) -> DMatrix<f64> {
        match self {
            Projector::Zero => DMatrix::zeros(dim, dim),
            Projector::Identity => DMatrix::identity(dim, dim),
            Projector::ConstantMatrix(m) => m.clone(),
            Projector::TimeVarying(f) => f(s),
        }
    }

    /// The translated projector `P_tau(s) = P(s + tau)`.
    pub fn translated(&self, tau: f64) -> Projector {
        match self {
            Projector::TimeVarying(f) => {
                let f = f.clone();
                Projector::TimeVarying(Arc::new(move |s| f(s + tau)))
            }
            other => other.clone(),
        }
    }

    /// 0/1 diagonal selection pattern, when the projector is diagonal. This
    /// is the case where products with diagonal evolution operators stay
    /// exactly representable in log-space.
    pub fn diagonal_selection(&self, dim: usize) -> Option<Vec<bool>> {
        match self {
            Projector::Zero => Some(vec![false; dim]),
            Projector::Identity => Some(vec![true; dim]),
            Projector::ConstantMatrix(m) => {
                if m.nrows() != dim || m.ncols() != dim {
                    return None;
                }
                let mut sel = vec![false; dim];
                for i in 0..dim {
                    for j in 0..dim {
                        let v = m[(i, j)];
                        if i == j {
                            if v == 1.0 {
                                sel[i] = true;
                            } else if v != 0.0 {
                                return None;
                            }
                        } else if v != 0.0 {
                            return None;
                        }
                    }
                }
                Some(sel)
            }
            Projector::TimeVarying(_) => None,
        }
    }

    /// Idempotence `P(s)^2 = P(s)` on a time grid.
    pub fn check_idempotent(&self, dim: usize, grid: &[f64]) -> CoreResult<()> {
        for &s in grid {
            let p = self.at(s, dim);
            let err = (&p * &p - &p).abs().max();
            if err > PROJECTOR_IDEMPOTENCE_TOL {
                return Err(CoreError::Input(format!(
                    "projector is not idempotent at s = {s} (error {err:.3e})"
                )));
            }
        }
        Ok(())
    }

    /// Invariance `P(t) Phi(t,s) = Phi(t,s) P(s)` on sample pairs.
    pub fn check_invariance(&self, op: &EvolutionOperator, pairs: &[(f64, f64)]) -> CoreResult<()> {
        let dim = op.system.dimension();
        for &(t, s) in pairs {
            let phi = op.evaluate(t, s)?;
            let lhs = self.at(t, dim) * &phi;
            let rhs = &phi * self.at(s, dim);
            let scale = spectral_norm(&phi).max(1.0);
            let err = (lhs - rhs).abs().max() / scale;
            if err > PROJECTOR_INVARIANCE_TOL {
                return Err(CoreError::Input(format!(
                    "projector is not invariant at (t, s) = ({t}, {s}) (relative error {err:.3e})"
                )));
            }
        }
        Ok(())
    }
}

impl Serialize for Projector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.kind_name())
    }
}

/// Parameters `(P; K, alpha, beta, theta, nu)` of a nonuniform mu-dichotomy.
#[derive(Clone, Debug)]
pub struct DichotomyCertificate {
    projector: Projector,
    log_k: f64,
    alpha: Option<f64>,
    beta: Option<f64>,
    theta: Option<f64>,
    nu: Option<f64>,
    rate: GrowthRate,
}

impl DichotomyCertificate {
    /// Build and validate a certificate. Absent parameters follow the
    /// asterisk convention: `P = 0` drops `alpha, theta`; `P = Id` drops
    /// `beta, nu`.
    pub fn new(
        projector: Projector,
        k: f64,
        alpha: Option<f64>,
        beta: Option<f64>,
        theta: Option<f64>,
        nu: Option<f64>,
        rate: GrowthRate,
    ) -> CoreResult<Self> {
        if !(k.is_finite() && k >= 1.0) {
            return Err(CoreError::parameter("certificate.k", "must be finite and >= 1"));
        }
        Self::with_log_k(projector, k.ln(), alpha, beta, theta, nu, rate)
    }

    /// As [`DichotomyCertificate::new`] with `K` given directly in log-space.
    pub fn with_log_k(
        projector: Projector,
        log_k: f64,
        alpha: Option<f64>,
        beta: Option<f64>,
        theta: Option<f64>,
        nu: Option<f64>,
        rate: GrowthRate,
    ) -> CoreResult<Self> {
        if !(log_k.is_finite() && log_k >= 0.0) {
            return Err(CoreError::parameter("certificate.k", "needs log K >= 0, i.e. K >= 1"));
        }
        if projector.is_zero() {
            if alpha.is_some() || theta.is_some() {
                return Err(CoreError::parameter(
                    "certificate.alpha",
                    "projector 0 carries no (alpha, theta); pass them as absent",
                ));
            }
        } else {
            let a = alpha.ok_or_else(|| {
                CoreError::parameter("certificate.alpha", "required unless the projector is 0")
            })?;
            if !(a.is_finite() && a < 0.0) {
                return Err(CoreError::parameter("certificate.alpha", "must be < 0"));
            }
            let th = theta.unwrap_or(0.0);
            if !(th.is_finite() && th >= 0.0) {
                return Err(CoreError::parameter("certificate.theta", "must be >= 0"));
            }
            if a + th >= 0.0 {
                return Err(CoreError::parameter(
                    "certificate.theta",
                    "needs alpha + theta < 0",
                ));
            }
        }
        if projector.is_identity() {
            if beta.is_some() || nu.is_some() {
                return Err(CoreError::parameter(
                    "certificate.beta",
                    "projector Id carries no (beta, nu); pass them as absent",
                ));
            }
        } else {
            let b = beta.ok_or_else(|| {
                CoreError::parameter("certificate.beta", "required unless the projector is Id")
            })?;
            if !(b.is_finite() && b > 0.0) {
                return Err(CoreError::parameter("certificate.beta", "must be > 0"));
            }
            let nv = nu.unwrap_or(0.0);
            if !(nv.is_finite() && nv >= 0.0) {
                return Err(CoreError::parameter("certificate.nu", "must be >= 0"));
            }
            if b - nv <= 0.0 {
                return Err(CoreError::parameter("certificate.nu", "needs beta - nu > 0"));
            }
        }
        // Absent main exponents drag their penalty exponents along.
        let theta = if alpha.is_none() { None } else { theta };
        let nu = if beta.is_none() { None } else { nu };
        Ok(DichotomyCertificate {
            projector,
            log_k,
            alpha,
            beta,
            theta,
            nu,
            rate,
        })
    }

    pub fn projector(&self) -> &Projector {
        &self.projector
    }
    pub fn k(&self) -> f64 {
        self.log_k.exp()
    }
    pub fn log_k(&self) -> f64 {
        self.log_k
    }
    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }
    pub fn beta(&self) -> Option<f64> {
        self.beta
    }
    pub fn theta(&self) -> Option<f64> {
        self.theta
    }
    pub fn nu(&self) -> Option<f64> {
        self.nu
    }
    pub fn rate(&self) -> &GrowthRate {
        &self.rate
    }

    /// `theta = nu = 0` (or absent): the uniform case.
    pub fn is_uniform(&self) -> bool {
        self.theta.unwrap_or(0.0) == 0.0 && self.nu.unwrap_or(0.0) == 0.0
    }

    /// `max{theta, nu}` over the present parameters.
    pub fn penalty_exponent(&self) -> f64 {
        self.theta.unwrap_or(0.0).max(self.nu.unwrap_or(0.0))
    }
}

impl Serialize for DichotomyCertificate {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("DichotomyCertificate", 7)?;
        st.serialize_field("projector_kind", self.projector.kind_name())?;
        st.serialize_field("k", &self.k())?;
        st.serialize_field("alpha", &self.alpha)?;
        st.serialize_field("beta", &self.beta)?;
        st.serialize_field("theta", &self.theta)?;
        st.serialize_field("nu", &self.nu)?;
        st.serialize_field("rate", &self.rate)?;
        st.end()
    }
}

/// Constants `(L, a, epsilon)` of nonuniform mu-bounded growth:
/// `||Phi(t,s)|| <= L (mu(t)/mu(s))^{sgn(t-s) a} mu(s)^{sgn(s) eps}`.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthCertificate {
    #[serde(rename = "l")]
    log_l: f64,
    pub a: f64,
    pub epsilon: f64,
    pub rate: GrowthRate,
}

impl GrowthCertificate {
    pub fn new(l: f64, a: f64, epsilon: f64, rate: GrowthRate) -> CoreResult<Self> {
        if !(l.is_finite() && l >= 1.0) {
            return Err(CoreError::parameter("growth.l", "must be finite and >= 1"));
        }
        Self::with_log_l(l.ln(), a, epsilon, rate)
    }

    pub fn with_log_l(log_l: f64, a: f64, epsilon: f64, rate: GrowthRate) -> CoreResult<Self> {
        if !(log_l.is_finite() && log_l >= 0.0) {
            return Err(CoreError::parameter("growth.l", "needs log L >= 0, i.e. L >= 1"));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(CoreError::parameter("growth.a", "must be > 0"));
        }
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(CoreError::parameter("growth.epsilon", "must be >= 0"));
        }
        Ok(GrowthCertificate {
            log_l,
            a,
            epsilon,
            rate,
        })
    }

    pub fn l(&self) -> f64 {
        self.log_l.exp()
    }
    pub fn log_l(&self) -> f64 {
        self.log_l
    }
    pub fn is_uniform(&self) -> bool {
        self.epsilon == 0.0
    }
}

/// Result of a certificate check over a pair grid.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub pass: bool,
    /// Smallest log-scale slack over the grid; negative means violation.
    pub worst_margin: f64,
    pub violating_pair: Option<(f64, f64)>,
    pub tolerance: f64,
    pub pairs_checked: usize,
}

impl VerificationReport {
    fn from_margins(worst: f64, worst_pair: Option<(f64, f64)>, tol: f64, pairs: usize) -> Self {
        VerificationReport {
            pass: worst >= -tol,
            worst_margin: worst,
            violating_pair: if worst < -tol { worst_pair } else { None },
            tolerance: tol,
            pairs_checked: pairs,
        }
    }
}

/// How `||Phi P||` is computed for one side of the splitting.
enum ProjSide {
    /// The factor is zero: the branch is vacuous.
    Vacuous,
    /// The factor is the identity.
    Full,
    /// Diagonal 0/1 selection on a scalar/diagonal system (exact log-space).
    Select(Vec<bool>),
    /// Dense product through the matrix representation.
    Dense,
}

fn side_for(projector: &Projector, system: &LinearSystem, complement: bool) -> ProjSide {
    let dim = system.dimension();
    let diag_ok = system.channels().is_some();
    match projector.diagonal_selection(dim) {
        Some(sel) if diag_ok => {
            let sel: Vec<bool> = if complement {
                sel.iter().map(|b| !b).collect()
            } else {
                sel
            };
            if sel.iter().all(|&b| !b) {
                ProjSide::Vacuous
            } else if sel.iter().all(|&b| b) {
                ProjSide::Full
            } else {
                ProjSide::Select(sel)
            }
        }
        _ => match projector {
            Projector::Zero => {
                if complement {
                    ProjSide::Full
                } else {
                    ProjSide::Vacuous
                }
            }
            Projector::Identity => {
                if complement {
                    ProjSide::Vacuous
                } else {
                    ProjSide::Full
                }
            }
            _ => ProjSide::Dense,
        },
    }
}

fn side_log_norm(
    op: &EvolutionOperator,
    projector: &Projector,
    side: &ProjSide,
    t: f64,
    s: f64,
    complement: bool,
) -> CoreResult<Option<f64>> {
    match side {
        ProjSide::Vacuous => Ok(None),
        ProjSide::Full => Ok(Some(op.log_norm(t, s)?)),
        ProjSide::Select(sel) => {
            let logs = op.log_diag(t, s)?;
            let m = logs
                .iter()
                .zip(sel)
                .filter(|(_, &keep)| keep)
                .map(|(&l, _)| l)
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(Some(m))
        }
        ProjSide::Dense => {
            let dim = op.system.dimension();
            let phi = op.evaluate(t, s)?;
            let p = projector.at(s, dim);
            let factor = if complement {
                DMatrix::identity(dim, dim) - p
            } else {
                p
            };
            let norm = spectral_norm(&(phi * factor));
            Ok(Some(if norm == 0.0 { f64::NEG_INFINITY } else { norm.ln() }))
        }
    }
}

fn projector_preflight(
    cert_projector: &Projector,
    op: &EvolutionOperator,
    grid: &PairGrid,
) -> CoreResult<()> {
    if matches!(cert_projector, Projector::Zero | Projector::Identity) {
        return Ok(());
    }
    let dim = op.system.dimension();
    let time_grid: Vec<f64> = (-5..=5).map(|i| i as f64).collect();
    cert_projector.check_idempotent(dim, &time_grid)?;
    // Diagonal selections commute with scalar/diagonal operators exactly.
    if cert_projector.diagonal_selection(dim).is_some() && op.system.channels().is_some() {
        return Ok(());
    }
    let sample: Vec<(f64, f64)> = grid
        .forward
        .iter()
        .filter(|&&(t, s)| (t - s).abs() <= 5.0 && t.abs() <= 10.0 && s.abs() <= 10.0)
        .take(8)
        .cloned()
        .collect();
    cert_projector.check_invariance(op, &sample)
}

/// Verify a dichotomy certificate over a pair grid, in log-space.
pub fn verify_dichotomy(
    system: &LinearSystem,
    cert: &DichotomyCertificate,
    grid: &PairGrid,
) -> CoreResult<VerificationReport> {
    let op = EvolutionOperator::auto(system);
    verify_dichotomy_with(&op, cert, grid)
}

/// As [`verify_dichotomy`], with an explicit evolution method.
pub fn verify_dichotomy_with(
    op: &EvolutionOperator,
    cert: &DichotomyCertificate,
    grid: &PairGrid,
) -> CoreResult<VerificationReport> {
    let system = &op.system;
    projector_preflight(&cert.projector, op, grid)?;
    let stable_side = side_for(&cert.projector, system, false);
    let unstable_side = side_for(&cert.projector, system, true);

    if cert.alpha.is_some()
        && !matches!(stable_side, ProjSide::Vacuous)
        && grid.forward.is_empty()
    {
        return Err(CoreError::parameter("grid", "stable branch requires pairs with t >= s"));
    }
    if cert.beta.is_some()
        && !matches!(unstable_side, ProjSide::Vacuous)
        && grid.backward.is_empty()
    {
        return Err(CoreError::parameter("grid", "unstable branch requires pairs with t <= s"));
    }

    let rate = &cert.rate;
    let mut worst = f64::INFINITY;
    let mut worst_pair = None;
    let mut pairs = 0usize;

    if let Some(alpha) = cert.alpha {
        if !matches!(stable_side, ProjSide::Vacuous) {
            let theta = cert.theta.unwrap_or(0.0);
            for &(t, s) in &grid.forward {
                let lhs = side_log_norm(op, &cert.projector, &stable_side, t, s, false)?
                    .expect("non-vacuous side");
                let rhs =
                    cert.log_k + alpha * rate.log_ratio(t, s) + sgn(s) * theta * rate.log_eval(s);
                pairs += 1;
                let margin = rhs - lhs;
                if margin < worst {
                    worst = margin;
                    worst_pair = Some((t, s));
                }
            }
        }
    }
    if let Some(beta) = cert.beta {
        if !matches!(unstable_side, ProjSide::Vacuous) {
            let nu = cert.nu.unwrap_or(0.0);
            for &(t, s) in &grid.backward {
                let lhs = side_log_norm(op, &cert.projector, &unstable_side, t, s, true)?
                    .expect("non-vacuous side");
                let rhs =
                    cert.log_k + beta * rate.log_ratio(t, s) + sgn(s) * nu * rate.log_eval(s);
                pairs += 1;
                let margin = rhs - lhs;
                if margin < worst {
                    worst = margin;
                    worst_pair = Some((t, s));
                }
            }
        }
    }
    let tol = if op.is_exact() {
        VERIFY_TOL_CLOSED
    } else {
        VERIFY_TOL_NUMERIC
    };
    Ok(VerificationReport::from_margins(worst, worst_pair, tol, pairs))
}

/// Verify a bounded-growth certificate: one two-sided inequality over both
/// branches of the grid.
pub fn verify_growth(
    system: &LinearSystem,
    cert: &GrowthCertificate,
    grid: &PairGrid,
) -> CoreResult<VerificationReport> {
    let op = EvolutionOperator::auto(system);
    let mut worst = f64::INFINITY;
    let mut worst_pair = None;
    let mut pairs = 0usize;
    for &(t, s) in grid.forward.iter().chain(grid.backward.iter()) {
        let lhs = op.log_norm(t, s)?;
        let rhs = cert.log_l
            + sgn(t - s) * cert.a * cert.rate.log_ratio(t, s)
            + sgn(s) * cert.epsilon * cert.rate.log_eval(s);
        pairs += 1;
        let margin = rhs - lhs;
        if margin < worst {
            worst = margin;
            worst_pair = Some((t, s));
        }
    }
    let tol = if op.is_exact() {
        VERIFY_TOL_CLOSED
    } else {
        VERIFY_TOL_NUMERIC
    };
    Ok(VerificationReport::from_margins(worst, worst_pair, tol, pairs))
}

/// Propagate a dichotomy certificate to the tau-translated system:
/// `K_tau = K * mu(tau)^{3 sgn(tau) max(theta, nu)}` in log-space, the
/// projector translates, the rate translates, and the exponents are kept.
pub fn propagate_dichotomy(
    cert: &DichotomyCertificate,
    tau: f64,
) -> CoreResult<DichotomyCertificate> {
    if !tau.is_finite() {
        return Err(CoreError::parameter("tau", "must be finite"));
    }
    let penalty = cert.penalty_exponent();
    let log_k_tau = if penalty == 0.0 {
        // Uniform case: K is preserved bit-exactly.
        cert.log_k
    } else {
        cert.log_k + 3.0 * sgn(tau) * penalty * cert.rate.log_eval(tau)
    };
    DichotomyCertificate::with_log_k(
        cert.projector.translated(tau),
        log_k_tau,
        cert.alpha,
        cert.beta,
        cert.theta,
        cert.nu,
        translate(&cert.rate, tau)?,
    )
}

/// Propagate a growth certificate: `L_tau = L * mu(tau)^{3 sgn(tau) eps}`.
pub fn propagate_growth(cert: &GrowthCertificate, tau: f64) -> CoreResult<GrowthCertificate> {
    if !tau.is_finite() {
        return Err(CoreError::parameter("tau", "must be finite"));
    }
    let log_l_tau = if cert.epsilon == 0.0 {
        cert.log_l
    } else {
        cert.log_l + 3.0 * sgn(tau) * cert.epsilon * cert.rate.log_eval(tau)
    };
    GrowthCertificate::with_log_l(log_l_tau, cert.a, cert.epsilon, translate(&cert.rate, tau)?)
}

/// Outcome of a minimal-K fit.
#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub log_k: f64,
    pub k_estimate: f64,
    /// True when the estimate settled under window doubling.
    pub stable: bool,
    pub stage_values: Vec<f64>,
}

/// Exponent bundle for [`fit_minimal_k`].
#[derive(Clone, Copy, Debug)]
pub struct FitExponents {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub theta: f64,
    pub nu: f64,
}

/// Invert the dichotomy inequalities for `K`: the estimate is the exp of the
/// largest log-slack required over expanding pair grids, and it is `stable`
/// when that sup settles under window doubling.
pub fn fit_minimal_k(
    system: &LinearSystem,
    projector: &Projector,
    rate: &GrowthRate,
    exponents: FitExponents,
    windows: &WindowSchedule,
) -> CoreResult<FitReport> {
    let op = EvolutionOperator::auto(system);
    let stable_side = side_for(projector, system, false);
    let unstable_side = side_for(projector, system, true);
    let mut stages = Vec::with_capacity(windows.stages);
    let mut sup = 0.0f64; // K >= 1: the bound at t = s already forces log K >= 0.
    for t_max in windows.windows() {
        let grid = PairGrid::verification(t_max, 12, 24);
        if let Some(alpha) = exponents.alpha {
            for &(t, s) in &grid.forward {
                if let Some(lhs) = side_log_norm(&op, projector, &stable_side, t, s, false)? {
                    let need = lhs
                        - alpha * rate.log_ratio(t, s)
                        - sgn(s) * exponents.theta * rate.log_eval(s);
                    sup = sup.max(need);
                }
            }
        }
        if let Some(beta) = exponents.beta {
            for &(t, s) in &grid.backward {
                if let Some(lhs) = side_log_norm(&op, projector, &unstable_side, t, s, true)? {
                    let need = lhs
                        - beta * rate.log_ratio(t, s)
                        - sgn(s) * exponents.nu * rate.log_eval(s);
                    sup = sup.max(need);
                }
            }
        }
        stages.push(sup);
    }
    let stable = classify_sweep(&stages, PLATEAU_TOL, f64::INFINITY) == SweepTrend::Plateau;
    Ok(FitReport {
        log_k: sup,
        k_estimate: sup.exp(),
        stable,
        stage_values: stages,
    })
}

/// Per-direction growth verdict of the subbundle probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionVerdict {
    Bounded,
    Diverging,
    Ambiguous,
}

/// Empirical dimensions of the stable/unstable/bounded subbundles at time 0.
#[derive(Clone, Debug, Serialize)]
pub struct SubbundleReport {
    pub stable_dim: usize,
    pub unstable_dim: usize,
    pub bounded_dim: usize,
    /// Indices of directions that were neither clearly bounded nor clearly
    /// diverging on some branch.
    pub ambiguous: Vec<usize>,
    pub per_direction: Vec<(DirectionVerdict, DirectionVerdict)>,
    pub max_log_norm: f64,
}

fn classify_direction(values: &[f64], threshold: f64) -> DirectionVerdict {
    let n = values.len();
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max <= threshold {
        return DirectionVerdict::Bounded;
    }
    // Positive trend over the last half of the horizon.
    let half = &values[n / 2..];
    let q = half.len() / 2;
    if q == 0 {
        return DirectionVerdict::Ambiguous;
    }
    let first: f64 = half[..q].iter().sum::<f64>() / q as f64;
    let second: f64 = half[q..].iter().sum::<f64>() / (half.len() - q) as f64;
    if values[n - 1] > threshold && second > first {
        DirectionVerdict::Diverging
    } else {
        DirectionVerdict::Ambiguous
    }
}

fn orthonormalize(basis: &[DVector<f64>]) -> CoreResult<Vec<DVector<f64>>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(basis.len());
    for v in basis {
        let mut w = v.clone();
        for u in &out {
            let c = u.dot(&w);
            w -= c * u;
        }
        let n = w.norm();
        if n < 1e-12 {
            return Err(CoreError::parameter("basis", "directions are linearly dependent"));
        }
        out.push(w / n);
    }
    Ok(out)
}

/// Classify orthonormalized initial directions by the growth of
/// `||Phi(t, 0) x||` over `[0, T]` and `[-T, 0]` and report the empirical
/// dimensions of the stable, unstable and bounded subbundles.
pub fn subbundle_probe(
    system: &LinearSystem,
    horizon: f64,
    basis: Option<&[DVector<f64>]>,
) -> CoreResult<SubbundleReport> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(CoreError::parameter("horizon", "must be finite and > 0"));
    }
    let dim = system.dimension();
    let directions: Vec<DVector<f64>> = match basis {
        Some(b) => {
            if b.len() > dim || b.iter().any(|v| v.len() != dim) {
                return Err(CoreError::parameter("basis", "dimension mismatch"));
            }
            orthonormalize(b)?
        }
        None => (0..dim)
            .map(|i| {
                let mut v = DVector::zeros(dim);
                v[i] = 1.0;
                v
            })
            .collect(),
    };
    let op = EvolutionOperator::auto(system);
    let forward_grid = linear_grid(0.0, horizon, 41);
    let backward_grid = linear_grid(-horizon, 0.0, 41);

    let mut per_direction = Vec::with_capacity(directions.len());
    let mut ambiguous = Vec::new();
    let (mut stable, mut unstable, mut bounded) = (0usize, 0usize, 0usize);
    let mut max_log = f64::NEG_INFINITY;
    for (idx, x) in directions.iter().enumerate() {
        let fwd: Vec<f64> = forward_grid
            .iter()
            .map(|&t| op.log_norm_applied(t, 0.0, x))
            .collect::<CoreResult<_>>()?;
        let mut bwd: Vec<f64> = backward_grid
            .iter()
            .map(|&t| op.log_norm_applied(t, 0.0, x))
            .collect::<CoreResult<_>>()?;
        // The backward branch is scanned outward in time (0 -> -T).
        bwd.reverse();
        max_log = max_log
            .max(fwd.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
            .max(bwd.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        let f = classify_direction(&fwd, SUBBUNDLE_LOG_THRESHOLD);
        let b = classify_direction(&bwd, SUBBUNDLE_LOG_THRESHOLD);
        if f == DirectionVerdict::Bounded {
            stable += 1;
        }
        if b == DirectionVerdict::Bounded {
            unstable += 1;
        }
        if f == DirectionVerdict::Bounded && b == DirectionVerdict::Bounded {
            bounded += 1;
        }
        if f == DirectionVerdict::Ambiguous || b == DirectionVerdict::Ambiguous {
            ambiguous.push(idx);
        }
        per_direction.push((f, b));
    }
    Ok(SubbundleReport {
        stable_dim: stable,
        unstable_dim: unstable,
        bounded_dim: bounded,
        ambiguous,
        per_direction,
        max_log_norm: max_log,
    })
}

/// Default verification grid: window 50, both branches.
pub fn default_verification_grid() -> PairGrid {
    PairGrid::verification(50.0, 16, 32)
}
