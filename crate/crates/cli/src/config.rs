//! Experiment configuration: schema, validation and normalization.
//!
//! Configs are JSON. Validation errors name the offending field path.
//! Normalization materializes every numeric default into the config before a
//! run, so the echoed config in the report pins the exact tolerances and
//! windows that produced the results.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use mudich_core::dichotomy::{DichotomyCertificate, GrowthCertificate, Projector};
use mudich_core::rate::GrowthRate;
use mudich_core::spectrum::ExtendedReal;
use mudich_core::system::{LinearSystem, ScalarChannel, ScalarKind, ScalarTable};
use mudich_core::{CoreError, WindowSchedule};

/// One reportable configuration error, carrying the field path.
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config.{}: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.to_string(),
        message: message.into(),
    }
}

fn core_err(field: &str, e: CoreError) -> ConfigError {
    err(field, e.to_string())
}

/// CLI subcommands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    RatesCompare,
    RatesClassify,
    RatesLimitProbe,
    SystemEvolve,
    DichotomyVerify,
    DichotomyFit,
    DichotomyPropagate,
    GrowthVerify,
    SpectrumEstimate,
    HullProbe,
    HullClassify,
    PaperExamples,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::RatesCompare => "rates-compare",
            CommandKind::RatesClassify => "rates-classify",
            CommandKind::RatesLimitProbe => "rates-limit-probe",
            CommandKind::SystemEvolve => "system-evolve",
            CommandKind::DichotomyVerify => "dichotomy-verify",
            CommandKind::DichotomyFit => "dichotomy-fit",
            CommandKind::DichotomyPropagate => "dichotomy-propagate",
            CommandKind::GrowthVerify => "growth-verify",
            CommandKind::SpectrumEstimate => "spectrum-estimate",
            CommandKind::HullProbe => "hull-probe",
            CommandKind::HullClassify => "hull-classify",
            CommandKind::PaperExamples => "paper-examples",
        }
    }
}

/// System declaration: a catalog entry, a diagonal of catalog entries, or a
/// tabulated coefficient loaded from CSV.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "catalog", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemSpec {
    PolyDecay,
    AbsRamp { slope: f64 },
    OscillatoryDamping { lambda: f64, eta: f64 },
    Constant { value: f64 },
    Cosine { mean: f64, amplitude: f64, omega: f64 },
    Diagonal { entries: Vec<SystemSpec> },
    /// CSV with columns `t, a11, a12, ..., aNN` (row-major), linear
    /// interpolation between samples. Scalar tables use two columns.
    Table { path: String, dimension: usize },
}

impl SystemSpec {
    pub fn build(&self, base_dir: &Path) -> Result<LinearSystem, ConfigError> {
        match self {
            SystemSpec::PolyDecay => Ok(LinearSystem::poly_decay()),
            SystemSpec::AbsRamp { slope } => {
                if !(slope.is_finite() && *slope > 0.0) {
                    return Err(err("system.slope", "must be finite and > 0"));
                }
                Ok(LinearSystem::abs_ramp(*slope))
            }
            SystemSpec::OscillatoryDamping { lambda, eta } => {
                if !lambda.is_finite() || !eta.is_finite() {
                    return Err(err("system.lambda", "parameters must be finite"));
                }
                Ok(LinearSystem::oscillatory_damping(*lambda, *eta))
            }
            SystemSpec::Constant { value } => {
                if !value.is_finite() {
                    return Err(err("system.value", "must be finite"));
                }
                Ok(LinearSystem::constant(*value))
            }
            SystemSpec::Cosine {
                mean,
                amplitude,
                omega,
            } => LinearSystem::cosine(*mean, *amplitude, *omega)
                .map_err(|e| core_err("system.omega", e)),
            SystemSpec::Diagonal { entries } => {
                if entries.is_empty() {
                    return Err(err("system.entries", "diagonal needs at least one entry"));
                }
                let mut channels: Vec<ScalarChannel> = Vec::with_capacity(entries.len());
                for (i, e) in entries.iter().enumerate() {
                    let sub = e.build(base_dir)?;
                    match sub.coefficient {
                        mudich_core::Coefficient::Scalar(ch) => channels.push(ch),
                        _ => {
                            return Err(err(
                                &format!("system.entries[{i}]"),
                                "diagonal entries must be scalar systems",
                            ))
                        }
                    }
                }
                LinearSystem::diagonal(channels, "diagonal")
                    .map_err(|e| core_err("system.entries", e))
            }
            SystemSpec::Table { path, dimension } => {
                let full = base_dir.join(path);
                build_table_system(&full, *dimension)
            }
        }
    }
}

fn build_table_system(path: &Path, dimension: usize) -> Result<LinearSystem, ConfigError> {
    if dimension == 0 {
        return Err(err("system.dimension", "must be >= 1"));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| err("system.path", format!("cannot read {}: {e}", path.display())))?;
    let want = 1 + dimension * dimension;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| err("system.path", format!("row {i}: {e}")))?;
        if record.len() != want {
            return Err(err(
                "system.path",
                format!("row {i} has {} columns, expected {want}", record.len()),
            ));
        }
        let vals: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let vals = vals.map_err(|e| err("system.path", format!("row {i}: {e}")))?;
        rows.push(vals);
    }
    if rows.len() < 2 {
        return Err(err("system.path", "table needs at least 2 rows"));
    }
    if dimension == 1 {
        let samples: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[1])).collect();
        let table = ScalarTable::new(samples).map_err(|e| core_err("system.path", e))?;
        return Ok(LinearSystem::scalar_table(
            table,
            path.file_name()
                .map(|s| s.to_string_lossy().to_string())
                .unwrap_or_else(|| "table".into()),
        ));
    }
    // Dense tabulated coefficient: one interpolation table per entry.
    let mut tables = Vec::with_capacity(dimension * dimension);
    for k in 0..dimension * dimension {
        let samples: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[1 + k])).collect();
        tables.push(ScalarTable::new(samples).map_err(|e| core_err("system.path", e))?);
    }
    let tables = Arc::new(tables);
    let dim = dimension;
    let func: mudich_core::system::MatrixFn = Arc::new(move |t| {
        nalgebra::DMatrix::from_fn(dim, dim, |i, j| tables[i * dim + j].eval(t))
    });
    LinearSystem::matrix(
        func,
        dimension,
        path.file_name()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| "table".into()),
    )
    .map_err(|e| core_err("system", e))
}

/// Constant projector declarations accepted from configs. Time-varying
/// projectors are API-only (explicit callables).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectorSpec {
    Zero,
    Identity,
    /// 0/1 diagonal selection pattern.
    Diagonal(Vec<bool>),
}

impl ProjectorSpec {
    pub fn build(&self) -> Projector {
        match self {
            ProjectorSpec::Zero => Projector::Zero,
            ProjectorSpec::Identity => Projector::Identity,
            ProjectorSpec::Diagonal(sel) => {
                let n = sel.len();
                let mut m = nalgebra::DMatrix::zeros(n, n);
                for (i, &keep) in sel.iter().enumerate() {
                    if keep {
                        m[(i, i)] = 1.0;
                    }
                }
                Projector::ConstantMatrix(m)
            }
        }
    }
}

/// Dichotomy certificate declaration; absent exponents are explicit nulls.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateSpec {
    pub projector: ProjectorSpec,
    pub k: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub nu: Option<f64>,
    pub rate: GrowthRate,
}

impl CertificateSpec {
    pub fn build(&self) -> Result<DichotomyCertificate, ConfigError> {
        self.rate
            .validate()
            .map_err(|e| core_err("certificate.rate", e))?;
        DichotomyCertificate::new(
            self.projector.build(),
            self.k,
            self.alpha,
            self.beta,
            self.theta,
            self.nu,
            self.rate.clone(),
        )
        .map_err(|e| core_err("certificate", e))
    }
}

/// Growth certificate declaration.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthCertificateSpec {
    pub l: f64,
    pub a: f64,
    #[serde(default)]
    pub epsilon: f64,
    pub rate: GrowthRate,
}

impl GrowthCertificateSpec {
    pub fn build(&self) -> Result<GrowthCertificate, ConfigError> {
        self.rate
            .validate()
            .map_err(|e| core_err("growth_certificate.rate", e))?;
        GrowthCertificate::new(self.l, self.a, self.epsilon, self.rate.clone())
            .map_err(|e| core_err("growth_certificate", e))
    }
}

/// Fit exponent bundle for `dichotomy-fit`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitExponentsSpec {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub nu: f64,
}

/// Every numeric knob, with defaults materialized by [`NumericsConfig::normalize`].
///
/// Defaults table:
///
/// | field                     | default       | used by                          |
/// |---------------------------|---------------|----------------------------------|
/// | comparison_window_t0      | 1.0           | rates-compare/classify           |
/// | comparison_window_stages  | 36            | rates-compare/classify           |
/// | bohl_window_t0            | 4.0           | spectrum, resolvent              |
/// | bohl_window_stages        | 14            | spectrum, resolvent              |
/// | fit_window_t0             | 5.0           | dichotomy-fit                    |
/// | fit_window_stages         | 6             | dichotomy-fit                    |
/// | verify_window             | 50.0          | dichotomy/growth verification    |
/// | verify_anchors_per_side   | 16            | verification pair grid           |
/// | verify_separations        | 32            | verification pair grid           |
/// | rk_step                   | 1e-3          | numeric evolution                |
/// | matrix_horizon            | 30.0          | dense matrix integration         |
/// | schedule_start / _end     | 3 / 12        | rates-limit-probe, hull-probe    |
/// | classify_schedule_end     | 26            | hull-classify convergence probes |
/// | compact_radius            | 10.0          | hull probes                      |
/// | grid_points               | 201           | hull probes                      |
/// | cauchy_tol                | 1e-6          | pointwise convergence            |
/// | uli_t0                    | 1.0           | local integrability              |
/// | probe_horizon             | 20.0          | bounded-solutions/subbundle      |
/// | slow_exponents            | .1 .25 .5 .75 .9 | classification witnesses     |
/// | fast_exponents            | 1.25 1.5 2 3  | classification witnesses         |
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    pub comparison_window_t0: Option<f64>,
    pub comparison_window_stages: Option<usize>,
    pub bohl_window_t0: Option<f64>,
    pub bohl_window_stages: Option<usize>,
    pub fit_window_t0: Option<f64>,
    pub fit_window_stages: Option<usize>,
    pub verify_window: Option<f64>,
    pub verify_anchors_per_side: Option<usize>,
    pub verify_separations: Option<usize>,
    pub rk_step: Option<f64>,
    pub matrix_horizon: Option<f64>,
    pub schedule_start: Option<u32>,
    pub schedule_end: Option<u32>,
    pub classify_schedule_end: Option<u32>,
    pub compact_radius: Option<f64>,
    pub grid_points: Option<usize>,
    pub cauchy_tol: Option<f64>,
    pub uli_t0: Option<f64>,
    pub probe_horizon: Option<f64>,
    pub slow_exponents: Option<Vec<f64>>,
    pub fast_exponents: Option<Vec<f64>>,
}

macro_rules! fill {
    ($slot:expr, $value:expr) => {
        if $slot.is_none() {
            $slot = Some($value);
        }
    };
}

impl NumericsConfig {
    /// Materialize every default. After this, no tolerance is implicit.
    pub fn normalize(&mut self, window_scale: f64) {
        fill!(self.comparison_window_t0, 1.0);
        fill!(self.comparison_window_stages, 36);
        fill!(self.bohl_window_t0, 4.0);
        fill!(self.bohl_window_stages, 14);
        fill!(self.fit_window_t0, 5.0);
        fill!(self.fit_window_stages, 6);
        fill!(self.verify_window, 50.0);
        fill!(self.verify_anchors_per_side, 16);
        fill!(self.verify_separations, 32);
        fill!(self.rk_step, 1e-3);
        fill!(self.matrix_horizon, 30.0);
        fill!(self.schedule_start, 3);
        fill!(self.schedule_end, 12);
        fill!(self.classify_schedule_end, 26);
        fill!(self.compact_radius, 10.0);
        fill!(self.grid_points, 201);
        fill!(self.cauchy_tol, 1e-6);
        fill!(self.uli_t0, 1.0);
        fill!(self.probe_horizon, 20.0);
        fill!(self.slow_exponents, vec![0.1, 0.25, 0.5, 0.75, 0.9]);
        fill!(self.fast_exponents, vec![1.25, 1.5, 2.0, 3.0]);
        if window_scale != 1.0 {
            for slot in [
                &mut self.comparison_window_t0,
                &mut self.bohl_window_t0,
                &mut self.fit_window_t0,
                &mut self.verify_window,
            ] {
                *slot = slot.map(|v| v * window_scale);
            }
        }
    }

    pub fn comparison_window(&self) -> Result<WindowSchedule, ConfigError> {
        WindowSchedule::new(
            self.comparison_window_t0.unwrap(),
            self.comparison_window_stages.unwrap(),
        )
        .map_err(|e| core_err("numerics.comparison_window_t0", e))
    }

    pub fn bohl_window(&self) -> Result<WindowSchedule, ConfigError> {
        WindowSchedule::new(self.bohl_window_t0.unwrap(), self.bohl_window_stages.unwrap())
            .map_err(|e| core_err("numerics.bohl_window_t0", e))
    }

    pub fn fit_window(&self) -> Result<WindowSchedule, ConfigError> {
        WindowSchedule::new(self.fit_window_t0.unwrap(), self.fit_window_stages.unwrap())
            .map_err(|e| core_err("numerics.fit_window_t0", e))
    }
}

/// Output location and format.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<String>,
    /// `json` or `json+csv`.
    pub format: Option<String>,
}

impl OutputConfig {
    pub fn normalize(&mut self) {
        fill!(self.dir, "out".to_string());
        fill!(self.format, "json".to_string());
    }

    pub fn wants_csv(&self) -> bool {
        self.format.as_deref() == Some("json+csv")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self.format.as_deref() {
            None | Some("json") | Some("json+csv") => Ok(()),
            Some(other) => Err(err(
                "output.format",
                format!("unknown format `{other}`; expected json or json+csv"),
            )),
        }
    }
}

/// A full experiment declaration.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    #[serde(default)]
    pub system: Option<SystemSpec>,
    #[serde(default)]
    pub rate: Option<GrowthRate>,
    #[serde(default)]
    pub rate_sigma: Option<GrowthRate>,
    #[serde(default)]
    pub certificate: Option<CertificateSpec>,
    #[serde(default)]
    pub growth_certificate: Option<GrowthCertificateSpec>,
    #[serde(default)]
    pub projector: Option<ProjectorSpec>,
    #[serde(default)]
    pub exponents: Option<FitExponentsSpec>,
    #[serde(default)]
    pub gamma: Option<ExtendedReal>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default)]
    pub tau_schedule: Option<Vec<f64>>,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        // serde_json names the offending key and location in its message.
        serde_json::from_str(text).map_err(|e| err("<root>", e.to_string()))
    }

    /// Normalize in place: defaults are materialized and basic shape checks
    /// run. Field requirements per command are checked by the runner.
    pub fn normalize(&mut self, window_scale: f64) -> Result<(), ConfigError> {
        if !(window_scale.is_finite() && window_scale > 0.0) {
            return Err(err("window_scale", "must be finite and > 0"));
        }
        self.numerics.normalize(window_scale);
        self.output.normalize();
        self.output.validate()?;
        if let Some(rate) = &self.rate {
            rate.validate().map_err(|e| core_err("rate", e))?;
        }
        if let Some(rate) = &self.rate_sigma {
            rate.validate().map_err(|e| core_err("rate_sigma", e))?;
        }
        for (name, v) in [("tau", self.tau), ("t", self.t), ("s", self.s)] {
            if let Some(x) = v {
                if !x.is_finite() {
                    return Err(err(name, "must be finite"));
                }
            }
        }
        Ok(())
    }

    pub fn require_system(&self, base_dir: &Path) -> Result<LinearSystem, ConfigError> {
        self.system
            .as_ref()
            .ok_or_else(|| err("system", "required by this command"))?
            .build(base_dir)
    }

    pub fn require_rate(&self) -> Result<&GrowthRate, ConfigError> {
        self.rate.as_ref().ok_or_else(|| err("rate", "required by this command"))
    }
}

/// Build a channel-backed scalar system directly from a closure; test and
/// suite helper.
pub fn scalar_from_fn(
    f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    label: &str,
) -> LinearSystem {
    LinearSystem {
        coefficient: mudich_core::Coefficient::Scalar(ScalarChannel::new(ScalarKind::Numeric(
            Arc::new(f),
        ))),
        label: label.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_minimal_config() {
        let cfg = ExperimentConfig::from_json(
            r#"{
                "command": "dichotomy-verify",
                "system": {"catalog": "poly-decay"},
                "certificate": {
                    "projector": "zero",
                    "k": 1.0,
                    "alpha": null,
                    "beta": 1.0,
                    "rate": {"kind": "polynomial"}
                }
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.command, CommandKind::DichotomyVerify);
        let cert = cfg.certificate.as_ref().unwrap().build().unwrap();
        assert_eq!(cert.beta(), Some(1.0));
        assert_eq!(cert.alpha(), None);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let result = ExperimentConfig::from_json(
            r#"{"command": "rates-classify", "rate": {"kind": "polynomial"}, "typo_field": 1}"#,
        );
        let e = result.unwrap_err();
        assert!(e.to_string().contains("typo_field"), "{e}");
    }

    #[test]
    fn missing_rate_is_named() {
        let cfg = ExperimentConfig::from_json(r#"{"command": "rates-classify"}"#).unwrap();
        let e = cfg.require_rate().unwrap_err();
        assert_eq!(e.field, "rate");
    }

    #[test]
    fn normalization_fills_every_numeric_default() {
        let mut cfg = ExperimentConfig::from_json(r#"{"command": "paper-examples"}"#).unwrap();
        cfg.normalize(1.0).unwrap();
        let v = serde_json::to_value(&cfg.numerics).unwrap();
        for (key, value) in v.as_object().unwrap() {
            assert!(!value.is_null(), "numerics.{key} left implicit");
        }
        assert_eq!(cfg.output.format.as_deref(), Some("json"));
    }

    #[test]
    fn window_scale_multiplies_windows() {
        let mut cfg = ExperimentConfig::from_json(r#"{"command": "paper-examples"}"#).unwrap();
        cfg.normalize(2.0).unwrap();
        assert_eq!(cfg.numerics.verify_window, Some(100.0));
        assert_eq!(cfg.numerics.comparison_window_t0, Some(2.0));
    }

    #[test]
    fn bad_rate_parameters_are_rejected() {
        let mut cfg = ExperimentConfig::from_json(
            r#"{"command": "rates-classify", "rate": {"kind": "superexponential", "r": 0.5}}"#,
        )
        .unwrap();
        let e = cfg.normalize(1.0).unwrap_err();
        assert_eq!(e.field, "rate");
    }
}
