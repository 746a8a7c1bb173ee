//! Linear nonautonomous systems `x' = A(t) x` and the coefficient catalog.
//!
//! Scalar and diagonal systems carry their coefficients as *channels* that
//! remember how they were built: a base form (closed-form catalog entry,
//! numeric callable or interpolation table), a time translation `tau`, and a
//! list of accumulated `(mu, gamma)` shifts. Closed-form channels expose an
//! exact antiderivative, so `log Phi(t, s)` is available in closed form even
//! after arbitrary translations and shifts; those closed forms are the test
//! oracles against which every numeric path is checked.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{CoreError, CoreResult};
use crate::grid::sgn;
use crate::rate::{translate, GrowthRate};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;

/// Catalog coefficients with exact antiderivatives.
#[derive(Clone, Debug, PartialEq)]
pub enum ClosedForm {
    /// `a(t) = value`.
    Constant { value: f64 },
    /// `a(t) = 1 / (1 + |t|)`; its evolution operator is the polynomial rate
    /// ratio `p(t)/p(s)`.
    PolyDecay,
    /// `a(t) = slope * |t|`; with `slope = 2` the evolution operator is the
    /// quadratic rate ratio `q(t)/q(s)`.
    AbsRamp { slope: f64 },
    /// `a(t) = -(lambda + eta * t * sin t)`: uniform decay with an
    /// oscillatory, linearly growing perturbation.
    OscillatoryDamping { lambda: f64, eta: f64 },
    /// `a(t) = mean + amplitude * cos(omega * t)`, a periodic sample.
    Cosine { mean: f64, amplitude: f64, omega: f64 },
}

impl ClosedForm {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ClosedForm::Constant { value } => *value,
            ClosedForm::PolyDecay => 1.0 / (1.0 + t.abs()),
            ClosedForm::AbsRamp { slope } => slope * t.abs(),
            ClosedForm::OscillatoryDamping { lambda, eta } => -(lambda + eta * t * t.sin()),
            ClosedForm::Cosine {
                mean,
                amplitude,
                omega,
            } => mean + amplitude * (omega * t).cos(),
        }
    }

    /// Antiderivative `F` with `F' = a`; only differences `F(t) - F(s)` are
    /// ever used, so the integration constant is arbitrary.
    pub fn antiderivative(&self, t: f64) -> f64 {
        match self {
            ClosedForm::Constant { value } => value * t,
            ClosedForm::PolyDecay => sgn(t) * t.abs().ln_1p(),
            ClosedForm::AbsRamp { slope } => sgn(t) * slope * t * t / 2.0,
            ClosedForm::OscillatoryDamping { lambda, eta } => {
                -lambda * t - eta * (t.sin() - t * t.cos())
            }
            ClosedForm::Cosine {
                mean,
                amplitude,
                omega,
            } => mean * t + amplitude / omega * (omega * t).sin(),
        }
    }

    /// Whether `a` has a kink at `t = 0` (the `|t|` forms).
    pub fn kink_at_zero(&self) -> bool {
        matches!(self, ClosedForm::PolyDecay | ClosedForm::AbsRamp { .. })
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, ClosedForm::Constant { .. } | ClosedForm::Cosine { .. })
    }
}

/// Sorted `(t, value)` samples evaluated by linear interpolation; queries
/// outside the sampled range clamp to the boundary values.
#[derive(Clone, Debug)]
pub struct ScalarTable {
    samples: Vec<(f64, f64)>,
}

impl ScalarTable {
    pub fn new(mut samples: Vec<(f64, f64)>) -> CoreResult<Self> {
        if samples.len() < 2 {
            return Err(CoreError::Input("table needs at least 2 samples".into()));
        }
        if samples.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(CoreError::Input("table contains non-finite entries".into()));
        }
        samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if samples.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(CoreError::Input("table has duplicate abscissae".into()));
        }
        Ok(ScalarTable { samples })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let s = &self.samples;
        if t <= s[0].0 {
            return s[0].1;
        }
        if t >= s[s.len() - 1].0 {
            return s[s.len() - 1].1;
        }
        let idx = s.partition_point(|&(x, _)| x <= t);
        let (t0, v0) = s[idx - 1];
        let (t1, v1) = s[idx];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }
}

/// One accumulated `(mu, gamma)` shift contributing
/// `-gamma * d/dt log mu(t)` to the coefficient.
#[derive(Clone, Debug)]
pub struct ShiftTerm {
    pub rate: GrowthRate,
    pub gamma: f64,
}

/// Base form of one scalar coefficient.
#[derive(Clone)]
pub enum ScalarKind {
    ClosedForm(ClosedForm),
    Numeric(ScalarFn),
    Table(Arc<ScalarTable>),
}

impl fmt::Debug for ScalarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarKind::ClosedForm(c) => write!(f, "ClosedForm({c:?})"),
            ScalarKind::Numeric(_) => write!(f, "Numeric(..)"),
            ScalarKind::Table(t) => write!(f, "Table({} samples)", t.samples.len()),
        }
    }
}

/// One scalar coefficient with its translation and shift bookkeeping:
/// `a(t) = base(t + tau) - sum_i gamma_i * d/dt log mu_i(t)`.
#[derive(Clone, Debug)]
pub struct ScalarChannel {
    pub kind: ScalarKind,
    pub tau: f64,
    pub shifts: Vec<ShiftTerm>,
}

impl ScalarChannel {
    pub fn new(kind: ScalarKind) -> Self {
        ScalarChannel {
            kind,
            tau: 0.0,
            shifts: Vec::new(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut a = match &self.kind {
            ScalarKind::ClosedForm(c) => c.eval(t + self.tau),
            ScalarKind::Numeric(f) => f(t + self.tau),
            ScalarKind::Table(tab) => tab.eval(t + self.tau),
        };
        for sh in &self.shifts {
            a -= sh.gamma * sh.rate.log_derivative(t);
        }
        a
    }

    /// Exact `log Phi(t, s) = int_s^t a(u) du` when the base has a closed
    /// antiderivative. Shift terms integrate exactly to `-gamma * dlog mu`.
    pub fn exact_log_phi(&self, t: f64, s: f64) -> Option<f64> {
        match &self.kind {
            ScalarKind::ClosedForm(c) => {
                let mut v = c.antiderivative(t + self.tau) - c.antiderivative(s + self.tau);
                for sh in &self.shifts {
                    v -= sh.gamma * (sh.rate.log_eval(t) - sh.rate.log_eval(s));
                }
                Some(v)
            }
            _ => None,
        }
    }

    pub fn has_closed_form(&self) -> bool {
        matches!(self.kind, ScalarKind::ClosedForm(_))
    }

    /// Translation by `tau`: the base translates additively and every shift
    /// rate translates as a rate, since `d/dt log mu(t + tau) = d/dt log
    /// mu_tau(t)`.
    pub fn translated(&self, tau: f64) -> CoreResult<ScalarChannel> {
        let mut shifts = Vec::with_capacity(self.shifts.len());
        for sh in &self.shifts {
            shifts.push(ShiftTerm {
                rate: translate(&sh.rate, tau)?,
                gamma: sh.gamma,
            });
        }
        Ok(ScalarChannel {
            kind: self.kind.clone(),
            tau: self.tau + tau,
            shifts,
        })
    }

    pub fn shifted(&self, rate: &GrowthRate, gamma: f64) -> ScalarChannel {
        let mut out = self.clone();
        if gamma != 0.0 {
            out.shifts.push(ShiftTerm {
                rate: rate.clone(),
                gamma,
            });
        }
        out
    }

    /// Points where the coefficient may lose smoothness; integrators split
    /// their panels here.
    pub fn kink_points(&self) -> Vec<f64> {
        let mut pts = Vec::new();
        let base_kink = match &self.kind {
            ScalarKind::ClosedForm(c) => c.kink_at_zero(),
            // Tables are piecewise linear and callables are opaque; splitting
            // at zero costs little and covers the sign-piecewise catalog.
            _ => true,
        };
        if base_kink {
            pts.push(-self.tau);
        }
        if !self.shifts.is_empty() {
            pts.push(0.0);
        }
        pts
    }

    pub fn is_periodic(&self) -> bool {
        match &self.kind {
            ScalarKind::ClosedForm(c) => c.is_periodic() && self.shifts.is_empty(),
            _ => false,
        }
    }
}

/// Matrix coefficient with the same translation/shift bookkeeping; shifts
/// subtract a scalar multiple of the identity.
#[derive(Clone)]
pub struct MatrixChannel {
    pub func: MatrixFn,
    pub dim: usize,
    pub tau: f64,
    pub shifts: Vec<ShiftTerm>,
}

impl fmt::Debug for MatrixChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MatrixChannel(dim={}, tau={})", self.dim, self.tau)
    }
}

impl MatrixChannel {
    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        let mut m = (self.func)(t + self.tau);
        debug_assert_eq!(m.nrows(), self.dim);
        debug_assert_eq!(m.ncols(), self.dim);
        let shift: f64 = self
            .shifts
            .iter()
            .map(|sh| sh.gamma * sh.rate.log_derivative(t))
            .sum();
        if shift != 0.0 {
            for i in 0..self.dim {
                m[(i, i)] -= shift;
            }
        }
        m
    }

    /// `log` of the scalar factor `exp(-sum gamma dlog mu)` between `s` and
    /// `t`; the shifted operator is the unshifted one times this factor.
    pub fn shift_log_factor(&self, t: f64, s: f64) -> f64 {
        -self
            .shifts
            .iter()
            .map(|sh| sh.gamma * (sh.rate.log_eval(t) - sh.rate.log_eval(s)))
            .sum::<f64>()
    }
}

/// Coefficient of a linear system.
#[derive(Clone, Debug)]
pub enum Coefficient {
    Scalar(ScalarChannel),
    Diagonal(Vec<ScalarChannel>),
    Matrix(MatrixChannel),
}

/// A linear nonautonomous system `x' = A(t) x`.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub coefficient: Coefficient,
    pub label: String,
}

impl LinearSystem {
    pub fn dimension(&self) -> usize {
        match &self.coefficient {
            Coefficient::Scalar(_) => 1,
            Coefficient::Diagonal(chs) => chs.len(),
            Coefficient::Matrix(m) => m.dim,
        }
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self.coefficient, Coefficient::Scalar(_))
    }

    /// Scalar and diagonal systems expose their channels; matrix systems do
    /// not decompose.
    pub fn channels(&self) -> Option<Vec<&ScalarChannel>> {
        match &self.coefficient {
            Coefficient::Scalar(c) => Some(vec![c]),
            Coefficient::Diagonal(chs) => Some(chs.iter().collect()),
            Coefficient::Matrix(_) => None,
        }
    }

    pub fn has_closed_form(&self) -> bool {
        self.channels()
            .map(|chs| chs.iter().all(|c| c.has_closed_form()))
            .unwrap_or(false)
    }

    pub fn is_periodic(&self) -> bool {
        self.channels()
            .map(|chs| chs.iter().all(|c| c.is_periodic()))
            .unwrap_or(false)
    }

    fn scalar(form: ClosedForm, label: impl Into<String>) -> Self {
        LinearSystem {
            coefficient: Coefficient::Scalar(ScalarChannel::new(ScalarKind::ClosedForm(form))),
            label: label.into(),
        }
    }

    /// `a(t) = 1/(1+|t|)`.
    pub fn poly_decay() -> Self {
        Self::scalar(ClosedForm::PolyDecay, "poly-decay")
    }

    /// `a(t) = slope * |t|`.
    pub fn abs_ramp(slope: f64) -> Self {
        Self::scalar(ClosedForm::AbsRamp { slope }, format!("abs-ramp({slope})"))
    }

    /// `a(t) = -(lambda + eta t sin t)`.
    pub fn oscillatory_damping(lambda: f64, eta: f64) -> Self {
        Self::scalar(
            ClosedForm::OscillatoryDamping { lambda, eta },
            format!("oscillatory-damping({lambda},{eta})"),
        )
    }

    /// `a(t) = c`.
    pub fn constant(c: f64) -> Self {
        Self::scalar(ClosedForm::Constant { value: c }, format!("constant({c})"))
    }

    /// `a(t) = mean + amplitude cos(omega t)`.
    pub fn cosine(mean: f64, amplitude: f64, omega: f64) -> CoreResult<Self> {
        if omega == 0.0 || !omega.is_finite() {
            return Err(CoreError::parameter("system.omega", "must be finite and nonzero"));
        }
        Ok(Self::scalar(
            ClosedForm::Cosine {
                mean,
                amplitude,
                omega,
            },
            format!("cosine({mean},{amplitude},{omega})"),
        ))
    }

    pub fn scalar_numeric(f: ScalarFn, label: impl Into<String>) -> Self {
        LinearSystem {
            coefficient: Coefficient::Scalar(ScalarChannel::new(ScalarKind::Numeric(f))),
            label: label.into(),
        }
    }

    pub fn scalar_table(table: ScalarTable, label: impl Into<String>) -> Self {
        LinearSystem {
            coefficient: Coefficient::Scalar(ScalarChannel::new(ScalarKind::Table(Arc::new(
                table,
            )))),
            label: label.into(),
        }
    }

    pub fn diagonal(channels: Vec<ScalarChannel>, label: impl Into<String>) -> CoreResult<Self> {
        if channels.is_empty() {
            return Err(CoreError::parameter("system.diagonal", "needs at least one entry"));
        }
        Ok(LinearSystem {
            coefficient: Coefficient::Diagonal(channels),
            label: label.into(),
        })
    }

    /// Constant diagonal system `diag(values)`.
    pub fn constant_diagonal(values: &[f64]) -> CoreResult<Self> {
        let channels = values
            .iter()
            .map(|&v| ScalarChannel::new(ScalarKind::ClosedForm(ClosedForm::Constant { value: v })))
            .collect();
        Self::diagonal(channels, format!("diag{values:?}"))
    }

    pub fn matrix(func: MatrixFn, dim: usize, label: impl Into<String>) -> CoreResult<Self> {
        if dim == 0 {
            return Err(CoreError::parameter("system.dimension", "must be >= 1"));
        }
        Ok(LinearSystem {
            coefficient: Coefficient::Matrix(MatrixChannel {
                func,
                dim,
                tau: 0.0,
                shifts: Vec::new(),
            }),
            label: label.into(),
        })
    }

    /// Coefficient value as a matrix, for probes that need `A(t)` itself.
    pub fn coefficient_at(&self, t: f64) -> DMatrix<f64> {
        match &self.coefficient {
            Coefficient::Scalar(c) => DMatrix::from_element(1, 1, c.eval(t)),
            Coefficient::Diagonal(chs) => {
                DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                    chs.len(),
                    chs.iter().map(|c| c.eval(t)),
                ))
            }
            Coefficient::Matrix(m) => m.eval(t),
        }
    }
}

/// The tau-translated system, with coefficient `t -> A(t + tau)`. Its
/// evolution operator satisfies `Phi_tau(t, s) = Phi(t + tau, s + tau)`.
pub fn translate_system(system: &LinearSystem, tau: f64) -> CoreResult<LinearSystem> {
    if !tau.is_finite() {
        return Err(CoreError::parameter("tau", "must be finite"));
    }
    if tau == 0.0 {
        return Ok(system.clone());
    }
    let coefficient = match &system.coefficient {
        Coefficient::Scalar(c) => Coefficient::Scalar(c.translated(tau)?),
        Coefficient::Diagonal(chs) => Coefficient::Diagonal(
            chs.iter()
                .map(|c| c.translated(tau))
                .collect::<CoreResult<_>>()?,
        ),
        Coefficient::Matrix(m) => {
            let mut shifts = Vec::with_capacity(m.shifts.len());
            for sh in &m.shifts {
                shifts.push(ShiftTerm {
                    rate: translate(&sh.rate, tau)?,
                    gamma: sh.gamma,
                });
            }
            Coefficient::Matrix(MatrixChannel {
                func: m.func.clone(),
                dim: m.dim,
                tau: m.tau + tau,
                shifts,
            })
        }
    };
    Ok(LinearSystem {
        coefficient,
        label: system.label.clone(),
    })
}

/// The `(mu, gamma)`-shifted system, with coefficient
/// `A(t) - gamma (d/dt log mu(t)) Id`. Its evolution operator satisfies
/// `Phi^{mu,gamma}(t,s) = Phi(t,s) (mu(t)/mu(s))^{-gamma}`.
pub fn shift_system(
    system: &LinearSystem,
    rate: &GrowthRate,
    gamma: f64,
) -> CoreResult<LinearSystem> {
    if !gamma.is_finite() {
        return Err(CoreError::parameter("gamma", "must be finite"));
    }
    if gamma == 0.0 {
        return Ok(system.clone());
    }
    let coefficient = match &system.coefficient {
        Coefficient::Scalar(c) => Coefficient::Scalar(c.shifted(rate, gamma)),
        Coefficient::Diagonal(chs) => {
            Coefficient::Diagonal(chs.iter().map(|c| c.shifted(rate, gamma)).collect())
        }
        Coefficient::Matrix(m) => {
            let mut shifts = m.shifts.clone();
            shifts.push(ShiftTerm {
                rate: rate.clone(),
                gamma,
            });
            Coefficient::Matrix(MatrixChannel {
                func: m.func.clone(),
                dim: m.dim,
                tau: m.tau,
                shifts,
            })
        }
    };
    Ok(LinearSystem {
        coefficient,
        label: format!("{}<shift {gamma}>", system.label),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn poly_decay_antiderivative_matches_rate() {
        let sys = LinearSystem::poly_decay();
        let Coefficient::Scalar(ch) = &sys.coefficient else {
            panic!()
        };
        let p = GrowthRate::Polynomial;
        for &(t, s) in &[(1.0, 0.0), (3.0, -2.0), (-5.0, -9.0)] {
            assert_relative_eq!(
                ch.exact_log_phi(t, s).unwrap(),
                p.log_eval(t) - p.log_eval(s),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn abs_ramp_log_phi_example() {
        let sys = LinearSystem::abs_ramp(2.0);
        let Coefficient::Scalar(ch) = &sys.coefficient else {
            panic!()
        };
        // int_1^3 2u du = 9 - 1 = 8
        assert_eq!(ch.exact_log_phi(3.0, 1.0).unwrap(), 8.0);
    }

    #[test]
    fn oscillatory_damping_antiderivative() {
        let f = ClosedForm::OscillatoryDamping {
            lambda: 1.0,
            eta: 0.2,
        };
        let h = 1e-6;
        for &t in &[-7.0, -1.3, 0.0, 2.0, 11.0] {
            let fd = (f.antiderivative(t + h) - f.antiderivative(t - h)) / (2.0 * h);
            assert_relative_eq!(fd, f.eval(t), epsilon = 1e-6);
        }
    }

    #[test]
    fn translated_channel_shifts_evaluation() {
        let sys = LinearSystem::poly_decay();
        let moved = translate_system(&sys, 2.0).unwrap();
        let Coefficient::Scalar(ch) = &moved.coefficient else {
            panic!()
        };
        assert_relative_eq!(ch.eval(1.0), 1.0 / 4.0);
        // Phi_2(1,0) = Phi(3,2) = 4/3
        assert_relative_eq!(
            ch.exact_log_phi(1.0, 0.0).unwrap(),
            (4.0f64 / 3.0).ln(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn shift_cancels_poly_decay_for_positive_times() {
        let sys = LinearSystem::poly_decay();
        let shifted = shift_system(&sys, &GrowthRate::Polynomial, 1.0).unwrap();
        let Coefficient::Scalar(ch) = &shifted.coefficient else {
            panic!()
        };
        for &t in &[0.5, 1.0, 7.0, 40.0] {
            assert_relative_eq!(ch.eval(t), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn zero_shift_and_zero_translation_are_identity() {
        let sys = LinearSystem::abs_ramp(2.0);
        let t0 = translate_system(&sys, 0.0).unwrap();
        let s0 = shift_system(&sys, &GrowthRate::Exponential, 0.0).unwrap();
        let Coefficient::Scalar(a) = &t0.coefficient else {
            panic!()
        };
        let Coefficient::Scalar(b) = &s0.coefficient else {
            panic!()
        };
        for &t in &[-3.0, 0.0, 2.5] {
            assert_eq!(a.eval(t), sys.coefficient_at(t)[(0, 0)]);
            assert_eq!(b.eval(t), sys.coefficient_at(t)[(0, 0)]);
        }
    }

    #[test]
    fn table_interpolates_and_clamps() {
        let tab = ScalarTable::new(vec![(0.0, 1.0), (2.0, 3.0), (1.0, 2.0)]).unwrap();
        assert_relative_eq!(tab.eval(0.5), 1.5);
        assert_relative_eq!(tab.eval(1.5), 2.5);
        assert_eq!(tab.eval(-10.0), 1.0);
        assert_eq!(tab.eval(10.0), 3.0);
        assert!(ScalarTable::new(vec![(0.0, 1.0)]).is_err());
        assert!(ScalarTable::new(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
    }

    #[test]
    fn periodic_detection() {
        assert!(LinearSystem::constant(1.0).is_periodic());
        assert!(LinearSystem::cosine(0.0, 1.0, 2.0).unwrap().is_periodic());
        assert!(!LinearSystem::poly_decay().is_periodic());
        let shifted =
            shift_system(&LinearSystem::constant(1.0), &GrowthRate::Polynomial, 0.5).unwrap();
        assert!(!shifted.is_periodic());
    }
}
