//! Evolution operators `Phi(t, s)` for linear systems.
//!
//! Scalar and diagonal systems are handled in log-space end to end:
//! `log Phi_i(t, s) = int_s^t a_i(u) du`, either from the exact catalog
//! antiderivative or by a fixed-step classical 4th-order scheme on the log
//! equation (which for a pure time integrand reduces to composite Simpson).
//! General matrix systems are integrated directly by fixed-step RK4 with an
//! overflow guard and a configurable horizon; superexponential examples leave
//! the representable range quickly, which is exactly why the scalar paths
//! never exponentiate.
//!
//! Catalog closed forms are the test oracles; numeric paths are never the
//! source of truth for acceptance values.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, CoreResult};
use crate::system::{Coefficient, LinearSystem, MatrixChannel, ScalarChannel};

/// Default integrator step.
pub const DEFAULT_STEP: f64 = 1e-3;
/// Default horizon `|t - s|` for direct matrix integration.
pub const DEFAULT_MATRIX_HORIZON: f64 = 30.0;
/// Log magnitude beyond which a matrix entry is no longer representable.
const LOG_OVERFLOW_LIMIT: f64 = 700.0;

/// How `Phi` is computed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Method {
    /// Exact antiderivatives of the catalog coefficients.
    ClosedForm,
    /// Composite Simpson on the log equation (scalar/diagonal only).
    Quadrature { step: f64 },
    /// Classical fixed-step 4th-order scheme. On scalar channels this acts on
    /// the log equation, where it coincides with the quadrature rule.
    RungeKutta { step: f64 },
}

impl Method {
    fn step(&self) -> Option<f64> {
        match self {
            Method::ClosedForm => None,
            Method::Quadrature { step } | Method::RungeKutta { step } => Some(*step),
        }
    }
}

/// Evolution operator of a linear system under a fixed method.
#[derive(Clone, Debug)]
pub struct EvolutionOperator {
    pub system: LinearSystem,
    pub method: Method,
    pub matrix_horizon: f64,
}

impl EvolutionOperator {
    pub fn closed_form(system: &LinearSystem) -> CoreResult<Self> {
        if !system.has_closed_form() {
            return Err(CoreError::Unsupported(format!(
                "system `{}` has no closed-form antiderivative; use a numeric method",
                system.label
            )));
        }
        Ok(EvolutionOperator {
            system: system.clone(),
            method: Method::ClosedForm,
            matrix_horizon: DEFAULT_MATRIX_HORIZON,
        })
    }

    pub fn numeric(system: &LinearSystem, method: Method) -> CoreResult<Self> {
        match method {
            Method::ClosedForm => return Self::closed_form(system),
            Method::Quadrature { step } | Method::RungeKutta { step } => {
                if !(step > 0.0 && step.is_finite()) {
                    return Err(CoreError::parameter("method.step", "must be finite and > 0"));
                }
                if matches!(method, Method::Quadrature { .. })
                    && matches!(system.coefficient, Coefficient::Matrix(_))
                {
                    return Err(CoreError::Unsupported(
                        "quadrature applies to scalar/diagonal systems; use runge-kutta".into(),
                    ));
                }
            }
        }
        Ok(EvolutionOperator {
            system: system.clone(),
            method,
            matrix_horizon: DEFAULT_MATRIX_HORIZON,
        })
    }

    /// Closed form when available, otherwise the default numeric method.
    pub fn auto(system: &LinearSystem) -> Self {
        if system.has_closed_form() {
            return EvolutionOperator {
                system: system.clone(),
                method: Method::ClosedForm,
                matrix_horizon: DEFAULT_MATRIX_HORIZON,
            };
        }
        let method = match system.coefficient {
            Coefficient::Matrix(_) => Method::RungeKutta { step: DEFAULT_STEP },
            _ => Method::Quadrature { step: DEFAULT_STEP },
        };
        EvolutionOperator {
            system: system.clone(),
            method,
            matrix_horizon: DEFAULT_MATRIX_HORIZON,
        }
    }

    pub fn with_matrix_horizon(mut self, horizon: f64) -> Self {
        self.matrix_horizon = horizon;
        self
    }

    pub fn is_exact(&self) -> bool {
        self.method == Method::ClosedForm
    }

    fn channel_log_phi(&self, ch: &ScalarChannel, t: f64, s: f64) -> f64 {
        match self.method {
            Method::ClosedForm => ch
                .exact_log_phi(t, s)
                .expect("closed-form operator over non-closed-form channel"),
            Method::Quadrature { step } | Method::RungeKutta { step } => {
                integrate_channel(ch, s, t, step)
            }
        }
    }

    /// Per-component `log Phi_i(t, s)` for scalar and diagonal systems.
    pub fn log_diag(&self, t: f64, s: f64) -> CoreResult<Vec<f64>> {
        check_times(t, s)?;
        match &self.system.coefficient {
            Coefficient::Scalar(c) => Ok(vec![self.channel_log_phi(c, t, s)]),
            Coefficient::Diagonal(chs) => {
                Ok(chs.iter().map(|c| self.channel_log_phi(c, t, s)).collect())
            }
            Coefficient::Matrix(_) => Err(CoreError::Unsupported(
                "log_diag needs a scalar or diagonal system".into(),
            )),
        }
    }

    /// `log ||Phi(t, s)||` (spectral norm). Exact in log-space for scalar and
    /// diagonal systems; via direct integration for matrix systems.
    pub fn log_norm(&self, t: f64, s: f64) -> CoreResult<f64> {
        match &self.system.coefficient {
            Coefficient::Matrix(_) => {
                let m = self.evaluate(t, s)?;
                Ok(spectral_norm(&m).ln())
            }
            _ => {
                let d = self.log_diag(t, s)?;
                Ok(d.into_iter().fold(f64::NEG_INFINITY, f64::max))
            }
        }
    }

    /// The full matrix `Phi(t, s)`. Errors with an overflow advisory when the
    /// entries leave the representable range; scalar and diagonal callers
    /// should prefer the log-space accessors.
    pub fn evaluate(&self, t: f64, s: f64) -> CoreResult<DMatrix<f64>> {
        check_times(t, s)?;
        let n = self.system.dimension();
        if t == s {
            return Ok(DMatrix::identity(n, n));
        }
        match &self.system.coefficient {
            Coefficient::Matrix(m) => {
                let step = self.method.step().unwrap_or(DEFAULT_STEP);
                rk4_matrix(m, s, t, step, self.matrix_horizon)
            }
            _ => {
                let logs = self.log_diag(t, s)?;
                if let Some(&bad) = logs.iter().find(|l| l.abs() > LOG_OVERFLOW_LIMIT) {
                    return Err(CoreError::Overflow(format!(
                        "log Phi = {bad:.3e} is outside the representable range for a dense \
                         matrix; use log-space accessors (log_diag/log_norm) or a shorter window"
                    )));
                }
                let mut out = DMatrix::zeros(n, n);
                for (i, l) in logs.iter().enumerate() {
                    out[(i, i)] = l.exp();
                }
                Ok(out)
            }
        }
    }

    /// `log ||Phi(t, s) x||` for a nonzero initial vector, overflow-free.
    pub fn log_norm_applied(&self, t: f64, s: f64, x: &DVector<f64>) -> CoreResult<f64> {
        check_times(t, s)?;
        if x.norm() == 0.0 {
            return Err(CoreError::parameter("x", "must be a nonzero vector"));
        }
        match &self.system.coefficient {
            Coefficient::Matrix(m) => {
                let step = self.method.step().unwrap_or(DEFAULT_STEP);
                rk4_vector_log_norm(m, s, t, step, x)
            }
            _ => {
                let logs = self.log_diag(t, s)?;
                let terms: Vec<f64> = logs
                    .iter()
                    .zip(x.iter())
                    .filter(|(_, &xi)| xi != 0.0)
                    .map(|(&l, &xi)| 2.0 * (l + xi.abs().ln()))
                    .collect();
                Ok(0.5 * log_sum_exp(&terms))
            }
        }
    }

    /// Difference between the current step and a halved step, as an a
    /// posteriori accuracy check for the numeric methods.
    pub fn refinement_error(&self, t: f64, s: f64) -> CoreResult<f64> {
        let Some(step) = self.method.step() else {
            return Ok(0.0);
        };
        let halved = EvolutionOperator {
            system: self.system.clone(),
            method: match self.method {
                Method::Quadrature { .. } => Method::Quadrature { step: step / 2.0 },
                Method::RungeKutta { .. } => Method::RungeKutta { step: step / 2.0 },
                Method::ClosedForm => unreachable!(),
            },
            matrix_horizon: self.matrix_horizon,
        };
        Ok((self.log_norm(t, s)? - halved.log_norm(t, s)?).abs())
    }
}

fn check_times(t: f64, s: f64) -> CoreResult<()> {
    if !t.is_finite() || !s.is_finite() {
        return Err(CoreError::Domain(format!("non-finite times (t={t}, s={s})")));
    }
    Ok(())
}

/// `ln(sum exp(terms))`, stable; `-inf` for an empty list.
fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    let sum: f64 = terms.iter().map(|&t| (t - m).exp()).sum();
    m + sum.ln()
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Segment boundaries of `[lo, hi]` split at the channel's kink points.
fn split_segments(kinks: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut cuts = vec![lo, hi];
    for &k in kinks {
        if k > lo && k < hi {
            cuts.push(k);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    cuts
}

/// `int_s^t a(u) du` by composite Simpson with panels of width <= `step`,
/// split at the channel's kink points to keep 4th-order accuracy.
pub fn integrate_channel(ch: &ScalarChannel, s: f64, t: f64, step: f64) -> f64 {
    if t == s {
        return 0.0;
    }
    let (lo, hi, sign) = if t > s { (s, t, 1.0) } else { (t, s, -1.0) };
    let cuts = split_segments(&ch.kink_points(), lo, hi);
    let mut total = 0.0;
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let n = ((b - a) / step).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let x0 = a + h * i as f64;
            let x1 = x0 + h;
            let xm = 0.5 * (x0 + x1);
            acc += h / 6.0 * (ch.eval(x0) + 4.0 * ch.eval(xm) + ch.eval(x1));
        }
        total += acc;
    }
    sign * total
}

fn rk4_steps(len: f64, step: f64) -> usize {
    (len / step).ceil().max(1.0) as usize
}

/// Fixed-step RK4 for `X' = A(t) X`, `X(s) = Id`, integrating toward `t`.
fn rk4_matrix(
    ch: &MatrixChannel,
    s: f64,
    t: f64,
    step: f64,
    horizon: f64,
) -> CoreResult<DMatrix<f64>> {
    if (t - s).abs() > horizon {
        return Err(CoreError::Overflow(format!(
            "span |t-s| = {:.3} exceeds the matrix-integration horizon {horizon}; use a \
             shorter window or a log-space scalar/diagonal formulation",
            (t - s).abs()
        )));
    }
    let n = ch.dim;
    let mut x = DMatrix::<f64>::identity(n, n);
    let (lo, hi) = if t > s { (s, t) } else { (t, s) };
    let mut cuts = split_segments(&[-ch.tau, 0.0], lo, hi);
    if t < s {
        cuts.reverse();
    }
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let steps = rk4_steps((b - a).abs(), step);
        let h = (b - a) / steps as f64;
        let mut u = a;
        for _ in 0..steps {
            let k1 = ch.eval(u) * &x;
            let k2 = ch.eval(u + 0.5 * h) * (&x + 0.5 * h * &k1);
            let k3 = ch.eval(u + 0.5 * h) * (&x + 0.5 * h * &k2);
            let k4 = ch.eval(u + h) * (&x + h * &k3);
            x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            u += h;
            let norm = x.norm();
            if !norm.is_finite() || norm > 1e300 {
                return Err(CoreError::Overflow(
                    "matrix evolution left the representable range; use a log-space \
                     scalar/diagonal formulation or a shorter window"
                        .into(),
                ));
            }
        }
    }
    Ok(x)
}

/// `log ||Phi(t, s) x||` for a matrix system by renormalized vector
/// propagation: overflow-free even over long spans.
fn rk4_vector_log_norm(
    ch: &MatrixChannel,
    s: f64,
    t: f64,
    step: f64,
    x0: &DVector<f64>,
) -> CoreResult<f64> {
    let mut v = x0.clone();
    let mut log_acc = 0.0;
    let (lo, hi) = if t > s { (s, t) } else { (t, s) };
    let mut cuts = split_segments(&[-ch.tau, 0.0], lo, hi);
    if t < s {
        cuts.reverse();
    }
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let steps = rk4_steps((b - a).abs(), step);
        let h = (b - a) / steps as f64;
        let mut u = a;
        for _ in 0..steps {
            let k1 = ch.eval(u) * &v;
            let k2 = ch.eval(u + 0.5 * h) * (&v + 0.5 * h * &k1);
            let k3 = ch.eval(u + 0.5 * h) * (&v + 0.5 * h * &k2);
            let k4 = ch.eval(u + h) * (&v + h * &k3);
            v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            u += h;
            let norm = v.norm();
            if !norm.is_finite() || norm == 0.0 {
                return Err(CoreError::Overflow(
                    "vector propagation degenerated; reduce the step or span".into(),
                ));
            }
            if !(1e-100..=1e100).contains(&norm) {
                log_acc += norm.ln();
                v /= norm;
            }
        }
    }
    Ok(log_acc + v.norm().ln())
}
