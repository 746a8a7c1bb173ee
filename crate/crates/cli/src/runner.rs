//! Command dispatch: builds inputs from the normalized config, calls into
//! the core operations and assembles the report.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use mudich_core::compare::{classify, compare_strong, compare_weak, ExponentGrid};
use mudich_core::dichotomy::{
    fit_minimal_k, propagate_dichotomy, verify_dichotomy, verify_growth, FitExponents,
};
use mudich_core::hull::{
    pointwise_limit_probe, uniform_local_integrability, ClassifyConfig, HullCertificates,
    LimitVerdict, OrbitProbe,
};
use mudich_core::spectrum::{estimate_spectrum, resolvent_test};
use mudich_core::system::translate_system;
use mudich_core::{
    dyadic_schedule, translated_limit_probe, CoreError, EvolutionOperator, PairGrid,
};

use crate::config::{CommandKind, ConfigError, ExperimentConfig};
use crate::report::{CsvGrid, Report, Verdict};
use crate::suite::{paper_examples_suite, Corruption};

/// Invocation-level options coming from CLI flags.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub seed: u64,
    pub window_scale: f64,
    /// Directory against which relative paths in the config resolve.
    pub base_dir: PathBuf,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seed: 0,
            window_scale: 1.0,
            base_dir: PathBuf::from("."),
        }
    }
}

/// Errors with distinct exit codes.
#[derive(Debug)]
pub enum RunError {
    /// Schema or parameter problem in the configuration (exit 2).
    Usage(String),
    /// Documented capability gap (exit 3).
    Unsupported(String),
    /// Evaluation failure at run time (exit 4).
    Runtime(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Usage(m) => write!(f, "usage error: {m}"),
            RunError::Unsupported(m) => write!(f, "unsupported: {m}"),
            RunError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Usage(e.to_string())
    }
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Unsupported(m) => RunError::Unsupported(m),
            CoreError::Parameter { .. } => RunError::Usage(e.to_string()),
            other => RunError::Runtime(other.to_string()),
        }
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

/// Multiplicative grid jitter controlled by `--seed`; seed 0 keeps the grid
/// deterministic and unjittered.
fn jitter_grid(grid: &mut PairGrid, seed: u64) {
    if seed == 0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut wobble = |pairs: &mut Vec<(f64, f64)>, forward: bool| {
        for (t, s) in pairs.iter_mut() {
            let et: f64 = rng.gen_range(-1e-4..1e-4);
            let es: f64 = rng.gen_range(-1e-4..1e-4);
            *t += et * (1.0 + t.abs());
            *s += es * (1.0 + s.abs());
            let keep = if forward { *t >= *s } else { *t <= *s };
            if !keep {
                std::mem::swap(t, s);
            }
        }
    };
    wobble(&mut grid.forward, true);
    wobble(&mut grid.backward, false);
}

fn verification_grid(config: &ExperimentConfig, seed: u64) -> PairGrid {
    let n = &config.numerics;
    let mut grid = PairGrid::verification(
        n.verify_window.unwrap(),
        n.verify_anchors_per_side.unwrap(),
        n.verify_separations.unwrap(),
    );
    jitter_grid(&mut grid, seed);
    grid
}

fn default_schedule(config: &ExperimentConfig, sign: f64) -> Vec<f64> {
    let n = &config.numerics;
    dyadic_schedule(sign, n.schedule_start.unwrap(), n.schedule_end.unwrap())
}

fn classify_config(config: &ExperimentConfig) -> Result<ClassifyConfig, RunError> {
    let n = &config.numerics;
    Ok(ClassifyConfig {
        compact_radius: n.compact_radius.unwrap(),
        grid_points: n.grid_points.unwrap(),
        schedule_forward: dyadic_schedule(1.0, n.schedule_start.unwrap(), n.classify_schedule_end.unwrap()),
        schedule_backward: dyadic_schedule(-1.0, n.schedule_start.unwrap(), n.classify_schedule_end.unwrap()),
        cauchy_tol: n.cauchy_tol.unwrap(),
        bounded_horizon: n.probe_horizon.unwrap(),
        uli_t0: n.uli_t0.unwrap(),
        uli_tau_grid: mudich_core::hull::default_uli_grid(),
        fast_rate_query: Some(mudich_core::GrowthRate::quadratic()),
        slow_rate_query: Some(mudich_core::GrowthRate::Polynomial),
        comparison_window: n.comparison_window()?,
        spectrum_window: n.bohl_window()?,
    })
}

fn exponent_grid(config: &ExperimentConfig) -> ExponentGrid {
    ExponentGrid {
        slow: config.numerics.slow_exponents.clone().unwrap(),
        fast: config.numerics.fast_exponents.clone().unwrap(),
    }
}

/// Execute one normalized config and return the report plus CSV emissions.
pub fn run(
    mut config: ExperimentConfig,
    opts: &RunOptions,
) -> Result<(Report, Vec<CsvGrid>), RunError> {
    config.normalize(opts.window_scale)?;
    let mut csv = Vec::new();
    let (results, verdict) = dispatch(&config, opts, &mut csv)?;
    let report = Report::new(config, results, verdict, opts.seed, opts.window_scale);
    Ok((report, csv))
}

fn pass_verdict() -> Verdict {
    Verdict {
        pass: true,
        failures: Vec::new(),
    }
}

fn fail_verdict(failures: Vec<String>) -> Verdict {
    Verdict {
        pass: failures.is_empty(),
        failures,
    }
}

fn dispatch(
    config: &ExperimentConfig,
    opts: &RunOptions,
    csv: &mut Vec<CsvGrid>,
) -> Result<(Value, Verdict), RunError> {
    match config.command {
        CommandKind::RatesCompare => {
            let mu = config.require_rate()?;
            let sigma = config
                .rate_sigma
                .as_ref()
                .ok_or_else(|| RunError::Usage("config.rate_sigma: required".into()))?;
            let window = config.numerics.comparison_window()?;
            let weak = compare_weak(mu, sigma, &window)?;
            let strong = compare_strong(mu, sigma, &window)?;
            Ok((json!({"weak": to_value(&weak), "strong": to_value(&strong)}), pass_verdict()))
        }
        CommandKind::RatesClassify => {
            let rate = config.require_rate()?;
            let window = config.numerics.comparison_window()?;
            let class = classify(rate, &exponent_grid(config), &window)?;
            Ok((json!({"class": to_value(&class)}), pass_verdict()))
        }
        CommandKind::RatesLimitProbe => {
            let rate = config.require_rate()?;
            let t = config
                .t
                .ok_or_else(|| RunError::Usage("config.t: required".into()))?;
            let schedule = config
                .tau_schedule
                .clone()
                .unwrap_or_else(|| default_schedule(config, 1.0));
            let verdict = translated_limit_probe(rate, t, &schedule)?;
            Ok((
                json!({"t": t, "tau_schedule": schedule, "limit": to_value(&verdict)}),
                pass_verdict(),
            ))
        }
        CommandKind::SystemEvolve => {
            let system = config.require_system(&opts.base_dir)?;
            let t = config
                .t
                .ok_or_else(|| RunError::Usage("config.t: required".into()))?;
            let s = config.s.unwrap_or(0.0);
            let op = EvolutionOperator::auto(&system)
                .with_matrix_horizon(config.numerics.matrix_horizon.unwrap());
            let log_norm = op.log_norm(t, s)?;
            let matrix = op.evaluate(t, s).ok().map(|m| {
                m.row_iter()
                    .map(|r| r.iter().cloned().collect::<Vec<f64>>())
                    .collect::<Vec<_>>()
            });
            let log_diag = op.log_diag(t, s).ok();
            // Trajectory of log ||Phi(x, s)|| from s to t.
            let steps = 200usize;
            let mut rows = Vec::with_capacity(steps + 1);
            for i in 0..=steps {
                let x = s + (t - s) * i as f64 / steps as f64;
                rows.push(vec![x, op.log_norm(x, s)?]);
            }
            csv.push(CsvGrid {
                name: "trajectory".into(),
                columns: vec!["t".into(), "log_norm_phi_t_s".into()],
                rows,
            });
            Ok((
                json!({
                    "t": t,
                    "s": s,
                    "method": to_value(&op.method),
                    "log_norm": log_norm,
                    "log_diag": log_diag,
                    "matrix": matrix,
                }),
                pass_verdict(),
            ))
        }
        CommandKind::DichotomyVerify => {
            let system = config.require_system(&opts.base_dir)?;
            let cert = config
                .certificate
                .as_ref()
                .ok_or_else(|| RunError::Usage("config.certificate: required".into()))?
                .build()?;
            let grid = verification_grid(config, opts.seed);
            let report = verify_dichotomy(&system, &cert, &grid)?;
            let verdict = if report.pass {
                pass_verdict()
            } else {
                fail_verdict(vec![format!(
                    "dichotomy certificate violated: worst margin {:.6e} at {:?}",
                    report.worst_margin, report.violating_pair
                )])
            };
            Ok((json!({"certificate": to_value(&cert), "verification": to_value(&report)}), verdict))
        }
        CommandKind::DichotomyFit => {
            let system = config.require_system(&opts.base_dir)?;
            let rate = config.require_rate()?;
            let projector = config
                .projector
                .as_ref()
                .ok_or_else(|| RunError::Usage("config.projector: required".into()))?
                .build();
            let e = config
                .exponents
                .as_ref()
                .ok_or_else(|| RunError::Usage("config.exponents: required".into()))?;
            let fit = fit_minimal_k(
                &system,
                &projector,
                rate,
                FitExponents {
                    alpha: e.alpha,
                    beta: e.beta,
                    theta: e.theta,
                    nu: e.nu,
                },
                &config.numerics.fit_window()?,
            )?;
            Ok((json!({"fit": to_value(&fit)}), pass_verdict()))
        }
        CommandKind::DichotomyPropagate => {
            let cert = config
                .certificate
                .as_ref()
                .ok_or_else(|| RunError::Usage("config.certificate: required".into()))?
                .build()?;
            let tau = config
                .tau
                .ok_or_else(|| RunError::Usage("config.tau: required".into()))?;
            let moved = propagate_dichotomy(&cert, tau)?;
            let mut verification = None;
            let mut verdict = pass_verdict();
            if let Some(spec) = &config.system {
                let system = spec.build(&opts.base_dir)?;
                let translated = translate_system(&system, tau)?;
                let grid = verification_grid(config, opts.seed);
                let report = verify_dichotomy(&translated, &moved, &grid)?;
                if !report.pass {
                    verdict = fail_verdict(vec![format!(
                        "propagated certificate fails on the translated system \
                         (margin {:.6e})",
                        report.worst_margin
                    )]);
                }
                verification = Some(report);
            }
            Ok((
                json!({
                    "tau": tau,
                    "certificate": to_value(&moved),
                    "verification": verification.as_ref().map(to_value),
                }),
                verdict,
            ))
        }
        CommandKind::GrowthVerify => {
            let system = config.require_system(&opts.base_dir)?;
            let cert = config
                .growth_certificate
                .as_ref()
                .ok_or_else(|| RunError::Usage("config.growth_certificate: required".into()))?
                .build()?;
            let grid = verification_grid(config, opts.seed);
            let report = verify_growth(&system, &cert, &grid)?;
            let verdict = if report.pass {
                pass_verdict()
            } else {
                fail_verdict(vec![format!(
                    "growth certificate violated: worst margin {:.6e} at {:?}",
                    report.worst_margin, report.violating_pair
                )])
            };
            Ok((json!({"certificate": to_value(&cert), "verification": to_value(&report)}), verdict))
        }
        CommandKind::SpectrumEstimate => {
            let system = config.require_system(&opts.base_dir)?;
            let rate = config.require_rate()?;
            let windows = config.numerics.bohl_window()?;
            let estimate = estimate_spectrum(&system, rate, &windows)?;
            let resolvent = config
                .gamma
                .map(|g| resolvent_test(&system, rate, g, &windows))
                .transpose()?;
            Ok((
                json!({
                    "spectrum": to_value(&estimate),
                    "resolvent": resolvent.as_ref().map(to_value),
                }),
                pass_verdict(),
            ))
        }
        CommandKind::HullProbe => {
            let system = config.require_system(&opts.base_dir)?;
            let n = &config.numerics;
            let radius = n.compact_radius.unwrap();
            let points = n.grid_points.unwrap();
            let schedules: Vec<(&str, Vec<f64>)> = match &config.tau_schedule {
                Some(s) => vec![("given", s.clone())],
                None => vec![
                    ("omega", default_schedule(config, 1.0)),
                    ("alpha", default_schedule(config, -1.0)),
                ],
            };
            let mut out = serde_json::Map::new();
            for (name, schedule) in &schedules {
                let probe = OrbitProbe::new(&system, schedule.clone(), radius, points)?;
                let report = pointwise_limit_probe(&probe, n.cauchy_tol.unwrap())?;
                if let LimitVerdict::ConvergentTo { limit } = &report.verdict {
                    let mut columns = vec!["t".to_string()];
                    for k in 0..limit.values[0].len() {
                        columns.push(format!("a{k}"));
                    }
                    csv.push(CsvGrid {
                        name: format!("limit_{name}"),
                        columns,
                        rows: limit
                            .grid
                            .iter()
                            .zip(&limit.values)
                            .map(|(&t, vals)| {
                                let mut row = vec![t];
                                row.extend_from_slice(vals);
                                row
                            })
                            .collect(),
                    });
                }
                out.insert(name.to_string(), to_value(&report));
            }
            let uli = uniform_local_integrability(
                &system,
                n.uli_t0.unwrap(),
                &mudich_core::hull::default_uli_grid(),
            )?;
            csv.push(CsvGrid {
                name: "uli_windows".into(),
                columns: vec!["tau".into(), "window_mean".into()],
                rows: uli.window_values.iter().map(|&(a, b)| vec![a, b]).collect(),
            });
            out.insert("uli".into(), to_value(&uli));
            Ok((Value::Object(out), pass_verdict()))
        }
        CommandKind::HullClassify => {
            let system = config.require_system(&opts.base_dir)?;
            let certs = HullCertificates {
                dichotomy: config
                    .certificate
                    .as_ref()
                    .map(|c| c.build())
                    .transpose()?,
                growth: config
                    .growth_certificate
                    .as_ref()
                    .map(|c| c.build())
                    .transpose()?,
            };
            let cfg = classify_config(config)?;
            let outcome = mudich_core::classify_limit_behavior(&system, &certs, &cfg)?;
            let verdict = fail_verdict(outcome.falsifications.clone());
            Ok((json!({"classification": to_value(&outcome)}), verdict))
        }
        CommandKind::PaperExamples => {
            let battery = paper_examples_suite(Corruption::None)?;
            let failures: Vec<String> = battery
                .checks
                .iter()
                .filter(|c| !c.pass)
                .map(|c| format!("{}: {}", c.id, c.detail))
                .collect();
            Ok((to_value(&battery), fail_verdict(failures)))
        }
    }
}
