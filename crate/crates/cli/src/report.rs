//! Report assembly and emission: one JSON report per invocation, plus
//! optional CSV grids for plot-ready data.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::config::ExperimentConfig;

pub const SCHEMA_VERSION: &str = "1";

/// Fixed tolerance set echoed into every report.
#[derive(Clone, Debug, Serialize)]
pub struct ToleranceSet {
    pub verify_tol_closed_form: f64,
    pub verify_tol_numeric: f64,
    pub plateau_tol: f64,
    pub divergence_log_threshold: f64,
    pub strong_ratio_threshold: f64,
    pub bohl_dlog_min: f64,
    pub pointwise_divergence_threshold: f64,
    pub subbundle_log_threshold: f64,
}

impl Default for ToleranceSet {
    fn default() -> Self {
        ToleranceSet {
            verify_tol_closed_form: mudich_core::dichotomy::VERIFY_TOL_CLOSED,
            verify_tol_numeric: mudich_core::dichotomy::VERIFY_TOL_NUMERIC,
            plateau_tol: mudich_core::grid::PLATEAU_TOL,
            divergence_log_threshold: mudich_core::grid::DIVERGENCE_LOG_THRESHOLD,
            strong_ratio_threshold: mudich_core::compare::STRONG_RATIO_THRESHOLD,
            bohl_dlog_min: mudich_core::spectrum::BOHL_DLOG_MIN,
            pointwise_divergence_threshold: mudich_core::hull::POINTWISE_DIVERGENCE_THRESHOLD,
            subbundle_log_threshold: mudich_core::dichotomy::SUBBUNDLE_LOG_THRESHOLD,
        }
    }
}

/// Run provenance. Excluded from determinism comparisons (wall clock).
#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub artifact_version: String,
    pub wall_clock_unix: u64,
    pub seed: u64,
    pub window_scale: f64,
    pub tolerances: ToleranceSet,
}

/// Overall run verdict.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub failures: Vec<String>,
}

/// One report per invocation: config echo, structured results, provenance
/// and the verdict summary.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: &'static str,
    pub command: String,
    pub config: ExperimentConfig,
    pub results: Value,
    pub provenance: Provenance,
    pub verdict: Verdict,
}

impl Report {
    pub fn new(
        config: ExperimentConfig,
        results: Value,
        verdict: Verdict,
        seed: u64,
        window_scale: f64,
    ) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: config.command.name().to_string(),
            config,
            results,
            provenance: Provenance {
                artifact_version: env!("CARGO_PKG_VERSION").to_string(),
                wall_clock_unix: SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
                seed,
                window_scale,
                tolerances: ToleranceSet::default(),
            },
            verdict,
        }
    }

    pub fn write_json(&self, dir: &Path) -> std::io::Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.json", self.command));
        fs::write(&path, serde_json::to_string_pretty(self).unwrap())?;
        Ok(path)
    }
}

/// A CSV emission: documented column header plus rows.
#[derive(Clone, Debug)]
pub struct CsvGrid {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvGrid {
    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.csv", self.name));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:.17e}")))?;
        }
        w.flush()?;
        Ok(path)
    }
}
