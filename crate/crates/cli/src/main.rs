//! `invlab` — seeded verification suites for the invariance-group
//! laboratory. Exit code 0 when every check passes, 1 when any check
//! fails, 2 on usage or configuration errors.

use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

use invariance_cli::config::{Suite, SuiteConfig};
use invariance_cli::suites::run_suite;

#[derive(Parser, Debug)]
#[command(
    name = "invlab",
    about = "Verification suites for the maximal invariance group of free nonrelativistic dynamics"
)]
struct Args {
    /// Suite to run: group, charges, dynamics, quantum, fluid, all.
    #[arg(long, default_value = "all")]
    suite: String,

    /// Seed for every randomized check (reports are byte-identical for a
    /// fixed seed and config, apart from wall time).
    #[arg(long)]
    seed: Option<u64>,

    /// Spatial dimension for the group and free-motion checks (1, 2, or 3).
    #[arg(long)]
    dim: Option<usize>,

    /// Optional TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Write CSV artifacts (trajectories, fields, fluid states) here.
    #[arg(long)]
    csv_dir: Option<PathBuf>,

    /// Parameter override key=value (repeatable), e.g. fluid_gamma0=1.4.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn build_config(args: &Args) -> Result<SuiteConfig, invariance_cli::config::ConfigError> {
    let mut cfg = match &args.config {
        Some(path) => SuiteConfig::from_file(path)?,
        None => SuiteConfig::default(),
    };
    cfg.suite = args.suite.parse::<Suite>()?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(dim) = args.dim {
        cfg.dim = dim;
    }
    if args.out.is_some() {
        cfg.out = args.out.clone();
    }
    if args.csv_dir.is_some() {
        cfg.csv_dir = args.csv_dir.clone();
    }
    for spec in &args.overrides {
        cfg.apply_override(spec)?;
    }
    if !(1..=3).contains(&cfg.dim) {
        return Err(invariance_cli::config::ConfigError::BadValue {
            key: "dim".into(),
            value: cfg.dim.to_string(),
        });
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match build_config(&args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match run_suite(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    for c in &report.checks {
        println!(
            "[{}] {:<45} residual {:>12.4e}  tol {:>9.1e}  ({})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.residual,
            c.tol,
            c.provenance
        );
    }
    println!(
        "suite '{}' seed {}: {} ({} checks, {:.0} ms)",
        report.suite,
        report.seed,
        if report.pass { "PASS" } else { "FAIL" },
        report.checks.len(),
        report.wall_time_ms
    );
    if let Some(path) = &cfg.out {
        if let Err(e) = std::fs::write(path, report.to_json()) {
            eprintln!("error: cannot write report to {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
