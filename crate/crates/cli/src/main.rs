use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use mudich_cli::config::ExperimentConfig;
use mudich_cli::runner::{run, RunError, RunOptions};

/// Growth rates, dichotomy certificates, spectra and hull probes for linear
/// nonautonomous ODEs.
#[derive(Parser, Debug)]
#[command(name = "mudich", version, about)]
struct Cli {
    /// Path to the JSON experiment config.
    #[arg(long)]
    config: PathBuf,

    /// Output directory (overrides `output.dir` from the config).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format: json or json+csv (overrides `output.format`).
    #[arg(long)]
    format: Option<String>,

    /// Seed for randomized grid jitter; 0 = no jitter.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Multiplies every sweep window.
    #[arg(long, default_value_t = 1.0)]
    window_scale: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("usage error: cannot read {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    let mut config = match ExperimentConfig::from_json(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("usage error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(out) = &cli.out {
        config.output.dir = Some(out.display().to_string());
    }
    if let Some(format) = &cli.format {
        config.output.format = Some(format.clone());
    }

    let base_dir = cli
        .config
        .parent()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    let opts = RunOptions {
        seed: cli.seed,
        window_scale: cli.window_scale,
        base_dir,
    };

    let (report, csv_grids) = match run(config, &opts) {
        Ok(pair) => pair,
        Err(RunError::Usage(m)) => {
            eprintln!("usage error: {m}");
            return ExitCode::from(2);
        }
        Err(RunError::Unsupported(m)) => {
            eprintln!("unsupported: {m}");
            return ExitCode::from(3);
        }
        Err(RunError::Runtime(m)) => {
            eprintln!("runtime error: {m}");
            return ExitCode::from(4);
        }
    };

    let out_dir = PathBuf::from(report.config.output.dir.clone().unwrap());
    match report.write_json(&out_dir) {
        Ok(path) => println!("report: {}", path.display()),
        Err(e) => {
            eprintln!("runtime error: cannot write report: {e}");
            return ExitCode::from(4);
        }
    }
    if report.config.output.wants_csv() {
        for grid in &csv_grids {
            match grid.write(&out_dir) {
                Ok(path) => println!("csv: {}", path.display()),
                Err(e) => {
                    eprintln!("runtime error: cannot write csv: {e}");
                    return ExitCode::from(4);
                }
            }
        }
    }

    if report.verdict.pass {
        println!("verdict: pass");
        ExitCode::SUCCESS
    } else {
        for f in &report.verdict.failures {
            eprintln!("failed: {f}");
        }
        println!("verdict: fail");
        ExitCode::from(1)
    }
}
