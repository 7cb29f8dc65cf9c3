//! Command-line front end: every analysis is a subcommand that reads a
//! `key = value` config, writes CSV tables and always leaves a
//! `manifest.txt` in the output directory.
//!
//! Exit codes: 0 all checks passed, 2 configuration or validation error,
//! 3 a check failed (or another runtime error), 4 non-finite result.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod output;

use config::{RawConfig, RunConfig};
use output::{Manifest, Report};

pub const TOOL: &str = "gradiplate";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] gradiplate_core::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use gradiplate_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(
                E::InvalidParams(_)
                | E::RegimeMismatch(_)
                | E::DegenerateCapacity { .. }
                | E::EpsilonOutOfRange(_)
                | E::InvalidTimeGrid(_)
                | E::PointOutsideDomain(_)
                | E::PreconditionUnmet(_),
            ) => 2,
            CliError::Core(E::NonFiniteResult { .. }) => 4,
            CliError::Core(_) | CliError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = TOOL, version = VERSION, about = "Thermoelastic plate analyses with CSV output")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides as `k=v`; repeatable, and `;` separates several in one value.
    #[arg(long = "params", value_name = "K=V")]
    params: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve the plate and check the energy identity.
    Simulate(Common),
    /// Weighted resolvent norm along the imaginary axis.
    ResolventScan(Common),
    /// Explicit sequence showing the semigroup is not differentiable.
    Nondiff(Common),
    /// Mode eigenvalues and the high-frequency strip.
    Spectrum(Common),
    /// Backward-in-time Lagrange identities and the Gronwall bound.
    Backward(Common),
    /// Convexity functional and the exponential lower bound.
    Instability(Common),
    /// Quasi-static reduction and its decay.
    Quasistatic(Common),
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::Simulate(c) => ("simulate", c),
            Command::ResolventScan(c) => ("resolvent-scan", c),
            Command::Nondiff(c) => ("nondiff", c),
            Command::Spectrum(c) => ("spectrum", c),
            Command::Backward(c) => ("backward", c),
            Command::Instability(c) => ("instability", c),
            Command::Quasistatic(c) => ("quasistatic", c),
        }
    }
}

/// Parses `args` (program name first), runs the subcommand and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (name, common) = cli.command.parts();
    let code = execute(name, common.config.as_deref(), &common.params, &common.out);
    if code != 0 {
        eprintln!(
            "{TOOL} {name}: exit {code}, see {}",
            common.out.join("manifest.txt").display()
        );
    }
    code
}

/// Splits `--params` values on `;` so that several overrides fit in one
/// argument. Commas are kept since list values use them.
fn overrides(params: &[String]) -> Vec<String> {
    params
        .iter()
        .flat_map(|p| p.split(';'))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

fn thread_count() -> Result<Option<usize>, CliError> {
    match std::env::var("GRADIPLATE_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!(
                "GRADIPLATE_THREADS = '{v}' must be a positive integer"
            ))),
        },
    }
}

/// Runs one subcommand end to end and writes its outputs under `out`.
pub fn execute(name: &str, config: Option<&Path>, params: &[String], out: &Path) -> i32 {
    let start = Instant::now();
    let mut manifest = Manifest::default();
    manifest.set("tool", TOOL);
    manifest.set("version", VERSION);
    manifest.set("subcommand", name);
    if let Some(path) = config {
        manifest.set("config_file", path.display().to_string());
    }

    if let Err(e) = std::fs::create_dir_all(out) {
        eprintln!("{TOOL}: cannot create {}: {e}", out.display());
        return 3;
    }

    let result = prepare(name, config, params, &mut manifest).and_then(|(cfg, threads)| {
        manifest.set(
            "threads",
            threads.map_or("default".to_string(), |n| n.to_string()),
        );
        for (k, v) in &cfg.echo {
            manifest.set(format!("config.{k}"), v.clone());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.unwrap_or(0))
            .build()
            .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
        let compute = Instant::now();
        let report = pool.install(|| commands::dispatch(name, &cfg))?;
        manifest.set(
            "timing.compute_seconds",
            format!("{:.6}", compute.elapsed().as_secs_f64()),
        );
        for table in &report.tables {
            table.write(out)?;
        }
        Ok(report)
    });

    let code = match &result {
        Ok(report) => {
            write_report(&mut manifest, report);
            if report.passed() {
                0
            } else {
                3
            }
        }
        Err(e) => {
            manifest.set("error", e.to_string());
            e.exit_code()
        }
    };
    let status = match code {
        0 => "pass",
        3 if result.is_ok() => "check_failed",
        _ => "error",
    };
    manifest.set("status", status);
    manifest.set("exit_code", code.to_string());
    manifest.set(
        "timing.total_seconds",
        format!("{:.6}", start.elapsed().as_secs_f64()),
    );
    if let Err(e) = manifest.write(out) {
        eprintln!("{TOOL}: {e}");
        return 3;
    }
    code
}

fn prepare(
    name: &str,
    config: Option<&Path>,
    params: &[String],
    manifest: &mut Manifest,
) -> Result<(RunConfig, Option<usize>), CliError> {
    let threads = thread_count()?;
    let mut raw = match config {
        Some(path) => RawConfig::load(path)?,
        None => RawConfig::default(),
    };
    let extra = overrides(params);
    for o in &extra {
        manifest.set("override", o.clone());
    }
    raw.apply_overrides(&extra)?;
    let cfg = RunConfig::resolve(&raw, commands::defaults(name))?;
    Ok((cfg, threads))
}

fn write_report(manifest: &mut Manifest, report: &Report) {
    for table in &report.tables {
        manifest.set(
            format!("output.{}", table.file),
            format!("{} rows", table.rows.len()),
        );
    }
    for (k, v) in &report.values {
        manifest.set(format!("value.{k}"), v.clone());
    }
    for c in &report.checks {
        manifest.set(
            format!("check.{}.status", c.name),
            if c.passed { "pass" } else { "fail" },
        );
        manifest.set(format!("check.{}.measured", c.name), c.measured.clone());
        manifest.set(format!("check.{}.tolerance", c.name), c.tolerance.clone());
    }
}
