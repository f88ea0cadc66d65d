//! `ncpsi`: batch driver for the operator calculus.
//!
//! Exit codes: 0 success, 2 config or input error, 3 numeric failure,
//! 4 tolerance breach under `--check` or in `selftest`.

mod config;
mod selftest;
mod tasks;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use config::{ConfigError, Experiment, ExperimentConfig, TruncationConfig};
use ncpsi::defaults::Defaults;
use ncpsi::io::write_json;

#[derive(Parser)]
#[command(name = "ncpsi", version, about = "Pseudodifferential calculus on noncommutative tori")]
struct Cli {
    /// Upper bound on worker threads.
    #[arg(long, env = "NCPSI_THREADS", global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Exit with code 4 when a task tolerance is breached.
        #[arg(long)]
        check: bool,
    },
    /// Run the invariant suites of every module at small size.
    Selftest {
        /// Corrupt the phase convention to show that the suites catch it.
        #[arg(long)]
        inject_phase_fault: bool,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Print the defaults table as TOML, ready to paste under `[defaults]`.
    ExportDefaults {
        /// Write to a file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_BREACH: u8 = 4;

fn classify(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return EXIT_CONFIG;
    }
    match err.downcast_ref::<ncpsi::Error>() {
        Some(
            ncpsi::Error::Parse { .. }
            | ncpsi::Error::Io(_)
            | ncpsi::Error::Json(_)
            | ncpsi::Error::DimensionMismatch { .. }
            | ncpsi::Error::NotAntisymmetric { .. }
            | ncpsi::Error::InvalidTruncation { .. }
            | ncpsi::Error::MarginViolation { .. },
        ) => EXIT_CONFIG,
        _ => EXIT_NUMERIC,
    }
}

#[derive(Serialize)]
struct ResultDocument<'a> {
    task: &'static str,
    seed: u64,
    n: usize,
    theta: Vec<Vec<f64>>,
    truncation: TruncationConfig,
    defaults: &'a Defaults,
    result: serde_json::Value,
    checks: Vec<tasks::Check>,
    passed: bool,
    artifacts: Vec<String>,
}

#[derive(Serialize)]
struct Timing {
    started_unix: f64,
    wall_seconds: f64,
    threads: usize,
}

fn run(config: &Path, check: bool) -> Result<u8> {
    let exp = Experiment::load(config)?;
    let dir = exp.output_dir();
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let stem = exp.stem();
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let clock = Instant::now();
    let out = tasks::run(&exp, &dir, &stem)?;
    let passed = out.checks.iter().all(|c| c.passed);
    let cfg: &ExperimentConfig = &exp.config;
    let doc = ResultDocument {
        task: cfg.task.name(),
        seed: exp.seed,
        n: cfg.n,
        theta: exp.theta.rows(),
        truncation: cfg.truncation,
        defaults: &cfg.defaults,
        result: out.result,
        checks: out.checks,
        passed,
        artifacts: out.artifacts,
    };
    let path = dir.join(format!("{stem}.json"));
    write_json(&path, &doc)?;
    let timing = Timing { started_unix: started, wall_seconds: clock.elapsed().as_secs_f64(), threads: rayon::current_num_threads() };
    write_json(&dir.join(format!("{stem}.timing.json")), &timing)?;

    println!("{} -> {}", doc.task, path.display());
    for c in &doc.checks {
        println!("  [{}] {}: {:.4e} (tol {:.1e})", if c.passed { "ok" } else { "FAIL" }, c.name, c.value, c.tol);
    }
    Ok(if check && !passed { EXIT_BREACH } else { 0 })
}

fn selftest(inject: bool, json: Option<&Path>) -> Result<u8> {
    let entries = selftest::run(inject);
    for e in &entries {
        println!(
            "{:<4} {:<16} {:<48} {:>9.2} ms  {}",
            if e.passed { "ok" } else { "FAIL" },
            e.module,
            e.name,
            e.wall_ms,
            e.detail
        );
    }
    let failed = entries.iter().filter(|e| !e.passed).count();
    println!("{} checks, {} failed", entries.len(), failed);
    if let Some(p) = json {
        write_json(p, &entries)?;
    }
    Ok(if failed > 0 { EXIT_BREACH } else { 0 })
}

fn export_defaults(out: Option<&Path>) -> Result<u8> {
    let text = toml::to_string_pretty(&Defaults::default()).context("serializing defaults")?;
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads.filter(|&t| t > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let outcome = match &cli.command {
        Command::Run { config, check } => run(config, *check),
        Command::Selftest { inject_phase_fault, json } => selftest(*inject_phase_fault, json.as_deref()),
        Command::ExportDefaults { out } => export_defaults(out.as_deref()),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(classify(&e))
        }
    }
}
