//! Sampling grids, expanding-window schedules and plateau/divergence
//! detection shared by the comparison, verification and spectrum sweeps.
//!
//! All asymptotic verdicts in this crate reduce to the same question: does a
//! scalar statistic computed over expanding windows settle, or does it run
//! away? The helpers here keep those heuristics in one place so every module
//! applies identical, declared thresholds.

use crate::error::{CoreError, CoreResult};

/// Sign convention used throughout: `sgn(0) = 0`, unlike `f64::signum`.
#[inline]
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Doubling window schedule `T0, 2*T0, 4*T0, ...` with `stages` entries.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WindowSchedule {
    pub t0: f64,
    pub stages: usize,
}

impl WindowSchedule {
    pub fn new(t0: f64, stages: usize) -> CoreResult<Self> {
        if !(t0 > 0.0 && t0.is_finite()) {
            return Err(CoreError::parameter("window.t0", "must be finite and > 0"));
        }
        if stages < 3 {
            return Err(CoreError::parameter(
                "window.stages",
                "schedule needs at least 3 doubling stages",
            ));
        }
        Ok(WindowSchedule { t0, stages })
    }

    /// Windows for the comparison sweeps. Reaches far enough that the
    /// slowest separations in the rate catalog resolve their ratio limits.
    pub fn comparison_default() -> Self {
        WindowSchedule { t0: 1.0, stages: 36 }
    }

    /// Windows for Bohl-exponent estimation.
    pub fn bohl_default() -> Self {
        WindowSchedule { t0: 4.0, stages: 14 }
    }

    /// Windows for certificate fitting.
    pub fn fit_default() -> Self {
        WindowSchedule { t0: 5.0, stages: 6 }
    }

    pub fn windows(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.stages).map(move |k| self.t0 * (1u64 << k.min(62)) as f64)
    }

    pub fn last_window(&self) -> f64 {
        self.t0 * (1u64 << (self.stages - 1).min(62)) as f64
    }

    pub fn scaled(&self, factor: f64) -> CoreResult<Self> {
        WindowSchedule::new(self.t0 * factor, self.stages)
    }
}

/// Strictly increasing positive points, logarithmically spaced in `[lo, hi]`.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (la, lb) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Symmetric grid `{0, ±x}` with `x` log-spaced in `[lo, T]`, sorted.
pub fn symmetric_log_grid(lo: f64, t: f64, per_side: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * per_side + 1);
    for x in log_spaced(lo, t, per_side) {
        out.push(-x);
        out.push(x);
    }
    out.push(0.0);
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Uniform grid with `n` points on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && hi > lo);
    let h = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + h * i as f64).collect()
}

/// Ordered pairs `(t, s)` used by the sweep statistics.
#[derive(Clone, Debug)]
pub struct PairGrid {
    /// Pairs with `t >= s`.
    pub forward: Vec<(f64, f64)>,
    /// Pairs with `t <= s`.
    pub backward: Vec<(f64, f64)>,
}

impl PairGrid {
    /// Pair grid for one comparison window `[-T, T]`.
    ///
    /// Anchors combine a fixed dyadic core (so that structure near the sign
    /// change stays on-grid at every stage) with window-proportional points;
    /// separations likewise mix fixed dyadic gaps with window-scale gaps.
    /// Comparison constants are attained either near t = s, near s = 0, or at
    /// separations comparable to the window, and this grid covers all three.
    pub fn comparison(t_max: f64) -> Self {
        let mut anchors = vec![0.0];
        let mut j = 0;
        loop {
            let x = (1u64 << j) as f64;
            if x > t_max || j > 10 {
                break;
            }
            anchors.push(x);
            anchors.push(-x);
            j += 1;
        }
        for f in [1.0, 0.5, 0.25] {
            let x = t_max * f;
            anchors.push(x);
            anchors.push(-x);
        }
        anchors.sort_by(|a, b| a.partial_cmp(b).unwrap());
        anchors.dedup();

        let mut seps = vec![0.0];
        let mut d = 0.25;
        while d <= 1024.0 && d <= 2.0 * t_max {
            seps.push(d);
            d *= 2.0;
        }
        if 2.0 * t_max > 1024.0 {
            seps.extend(log_spaced(t_max / 64.0, 2.0 * t_max, 14));
        }

        let mut forward = Vec::new();
        for &s in &anchors {
            for &d in &seps {
                let t = s + d;
                if t.abs() <= t_max {
                    forward.push((t, s));
                }
            }
        }
        let backward = forward.iter().map(|&(t, s)| (s, t)).collect();
        PairGrid { forward, backward }
    }

    /// Pair grid for certificate verification over `[-T, T]`: anchors are a
    /// symmetric log-spaced set including the sign change, separations are
    /// log-spaced up to the full window, and both branches are populated.
    pub fn verification(t_max: f64, anchors_per_side: usize, seps: usize) -> Self {
        let mut anchors = symmetric_log_grid(1e-3, t_max, anchors_per_side);
        // Land exactly on the window endpoints.
        anchors.push(t_max);
        anchors.push(-t_max);
        anchors.sort_by(|a, b| a.partial_cmp(b).unwrap());
        anchors.dedup();

        let mut separations = vec![0.0];
        separations.extend(log_spaced(1e-3, 2.0 * t_max, seps));

        let mut forward = Vec::new();
        for &s in &anchors {
            for &d in &separations {
                let t = s + d;
                if t.abs() <= t_max {
                    forward.push((t, s));
                }
            }
        }
        let backward = forward.iter().map(|&(t, s)| (s, t)).collect();
        PairGrid { forward, backward }
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty() && self.backward.is_empty()
    }
}

/// Outcome of watching a statistic across doubling windows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SweepTrend {
    /// Last doubling changed the statistic by less than the plateau tolerance.
    Plateau,
    /// Statistic exceeded the divergence threshold with a monotone tail.
    Diverging,
    /// Neither settled nor ran away within the schedule.
    Undecided,
}

/// Additive change below which a doubling is considered to have settled.
pub const PLATEAU_TOL: f64 = 1e-3;
/// Log-scale magnitude past which a monotone statistic is declared divergent.
pub const DIVERGENCE_LOG_THRESHOLD: f64 = 50.0;

/// Classify a per-stage statistic (largest value wins, e.g. a running sup).
/// A settled statistic is a plateau even when it settled above the divergence
/// threshold, so the plateau test runs first.
pub fn classify_sweep(stages: &[f64], plateau_tol: f64, divergence_threshold: f64) -> SweepTrend {
    let n = stages.len();
    if n < 3 {
        return SweepTrend::Undecided;
    }
    let last = stages[n - 1];
    let prev = stages[n - 2];
    if (last - prev).abs() <= plateau_tol {
        return SweepTrend::Plateau;
    }
    if last > divergence_threshold && last >= prev && prev >= stages[n - 3] {
        return SweepTrend::Diverging;
    }
    SweepTrend::Undecided
}

/// True when the tail of `stages` is non-increasing (within `slack`) and the
/// final value is below `threshold`. Used by the strong-comparison ratio test.
pub fn decays_below(stages: &[f64], threshold: f64, slack: f64) -> bool {
    let n = stages.len();
    if n < 3 {
        return false;
    }
    let tail = n.min(4);
    let monotone = stages[n - tail..]
        .windows(2)
        .all(|w| w[1] <= w[0] + slack);
    monotone && stages[n - 1] < threshold
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sgn_is_zero_at_zero() {
        assert_eq!(sgn(0.0), 0.0);
        assert_eq!(sgn(3.5), 1.0);
        assert_eq!(sgn(-0.1), -1.0);
    }

    #[test]
    fn window_schedule_doubles() {
        let w = WindowSchedule::new(2.0, 4).unwrap();
        let v: Vec<f64> = w.windows().collect();
        assert_eq!(v, vec![2.0, 4.0, 8.0, 16.0]);
        assert_eq!(w.last_window(), 16.0);
    }

    #[test]
    fn window_schedule_rejects_degenerate() {
        assert!(WindowSchedule::new(0.0, 4).is_err());
        assert!(WindowSchedule::new(-1.0, 4).is_err());
        assert!(WindowSchedule::new(1.0, 2).is_err());
    }

    #[test]
    fn comparison_grid_contains_sign_change_pairs() {
        let g = PairGrid::comparison(1024.0);
        assert!(g.forward.iter().any(|&(t, s)| s < 0.0 && t > 0.0));
        assert!(g.forward.iter().all(|&(t, s)| t >= s));
        assert!(g.backward.iter().all(|&(t, s)| t <= s));
    }

    #[test]
    fn sweep_classification() {
        assert_eq!(
            classify_sweep(&[1.0, 1.2, 1.2004], PLATEAU_TOL, 50.0),
            SweepTrend::Plateau
        );
        assert_eq!(
            classify_sweep(&[10.0, 40.0, 90.0], PLATEAU_TOL, 50.0),
            SweepTrend::Diverging
        );
        assert_eq!(
            classify_sweep(&[10.0, 20.0, 25.0], PLATEAU_TOL, 50.0),
            SweepTrend::Undecided
        );
    }

    #[test]
    fn decay_detection() {
        assert!(decays_below(&[0.9, 0.5, 0.2, 0.04, 0.01], 0.05, 1e-9));
        assert!(!decays_below(&[0.5, 0.5, 0.5, 0.5], 0.05, 1e-9));
        assert!(!decays_below(&[0.2, 0.01, 0.04], 0.05, 1e-9));
    }
}
