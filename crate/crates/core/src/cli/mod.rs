//! `parcomp`: batch front end over the library.
//!
//! Exit status is 0 on success, 1 on a domain error (reduction hypothesis
//! violated, zero population, a correspondence check outside tolerance,
//! I/O failure) and 2 on a configuration or usage error.

mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::experiments::Axis;
use config::{Config, Loaded};

#[derive(Debug, Parser)]
#[command(
    name = "parcomp",
    version,
    about = "Two-species competition with a shared parasite: simulation, reduction and case analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file.
    #[arg(short = 'c', long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Basin grid resolution, e.g. 200x200.
    #[arg(long, global = true, value_name = "NxM", value_parser = parse_resolution)]
    pub resolution: Option<(usize, usize)>,
    /// Disease episodes per demographic step.
    #[arg(long, global = true, value_name = "INT")]
    pub k: Option<u32>,
    /// Set ν = 1/R₀ directly instead of deriving it from [disease].
    #[arg(long, global = true, value_name = "REAL")]
    pub nu: Option<f64>,
    /// Sweep axis for `bifurcate`, e.g. nu=0.01:0.99:0.02 or bS1=2:20:0.5.
    #[arg(long, global = true, value_name = "PARAM=lo:hi:step", value_parser = parse_sweep)]
    pub sweep: Vec<(String, Axis)>,
    /// Orbit convergence tolerance; for `correspond`, the relative tolerance
    /// of the comparison.
    #[arg(long, global = true, value_name = "REAL")]
    pub tol: Option<f64>,
    /// Worker threads for grid experiments.
    #[arg(long, global = true, value_name = "INT")]
    pub threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Iterate the full four-variable model.
    Step,
    /// Run one orbit of the reduced map.
    Simulate,
    /// Print the reduced parameters.
    Reduce,
    /// List equilibria of the reduced map with their stability.
    Equilibria,
    /// Print the case label of the reduced map.
    Classify,
    /// Basin-of-attraction raster.
    Basin,
    /// Case labels over a (ν, parameter) grid.
    Bifurcate,
    /// Certify convergence of the disease iterates to the endemic split.
    Converge,
    /// Compare full-model limits with the reduced prediction.
    Correspond,
}

fn parse_resolution(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("{s:?} is not NxM"))?;
    let n: usize = a
        .trim()
        .parse()
        .map_err(|_| format!("{a:?} is not a count"))?;
    let m: usize = b
        .trim()
        .parse()
        .map_err(|_| format!("{b:?} is not a count"))?;
    if n == 0 || m == 0 {
        return Err("resolution must be positive".into());
    }
    Ok((n, m))
}

fn parse_sweep(s: &str) -> Result<(String, Axis), String> {
    let (name, axis) = s
        .split_once('=')
        .ok_or_else(|| format!("{s:?} is not PARAM=lo:hi:step"))?;
    let axis = Axis::parse(axis).map_err(|e| e.to_string())?;
    Ok((name.trim().to_string(), axis))
}

/// Outcome of a command that did not succeed.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Config(String),
    Domain(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Domain(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Domain(m) => m,
        }
    }
}

fn domain<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Domain(e.to_string())
}

/// Runs `parcomp` with process stdout/stderr.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

/// Runs `parcomp`, writing human-readable output to `out` and diagnostics
/// to `err`; returns the exit status.
pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(f) => {
            let kind = match f {
                Failure::Config(_) => "config error",
                Failure::Domain(_) => "error",
            };
            let _ = writeln!(err, "parcomp: {kind}: {}", f.message());
            f.exit_code()
        }
    }
}

fn load(cli: &Cli) -> Result<Loaded, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("missing -c/--config PATH".into()))?;
    let src = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    Config::parse(&src).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn check_flags(cli: &Cli) -> Result<(), Failure> {
    if let Some(nu) = cli.nu {
        if !(nu > 0.0 && nu <= 1.0) {
            return Err(Failure::Config(format!("--nu {nu} outside (0, 1]")));
        }
    }
    if let Some(tol) = cli.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Failure::Config(format!("--tol {tol} must be positive")));
        }
    }
    if cli.threads == Some(0) {
        return Err(Failure::Config("--threads must be at least 1".into()));
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<String, Failure> {
    check_flags(cli)?;
    let loaded = load(cli)?;
    let job = || commands::dispatch(cli, &loaded);
    match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(domain)?
            .install(job),
        None => job(),
    }
}
