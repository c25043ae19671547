//! Command-line front end for `qudit-phase`. Every subcommand writes its
//! tables plus a `.meta.json` file recording the version, seed and flags.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qudit_phase::PhasePointKind;

mod commands;
mod error;
mod output;
mod plot;

pub use error::CliError;
pub use output::{Format, Sink};
pub use plot::{emit_plot_script, PlotKind};

pub const MAX_DIM: usize = 4096;
pub const THREADS_ENV: &str = "QUDIT_PHASE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "qudit-phase", version, about = "Finite-dimensional phase space toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Hilbert-space dimension.
    #[arg(long, global = true, default_value_t = 5, value_parser = parse_dim)]
    pub d: usize,

    /// Mixing angle, as a number or `pi/k`.
    #[arg(long, global = true, default_value = "pi/4", value_parser = parse_theta)]
    pub theta: f64,

    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Largest eigenvalue, Perron vector, gap and symmetry residuals.
    Harper,
    /// Certainty of the minimum-uncertainty family and the optimizer.
    States(StatesArgs),
    /// Quasi-probability grid, marginals, sharpness and reconstruction.
    Quasiprob(QuasiprobArgs),
    /// Fourier coefficient tables, zero set and positivity report.
    Complete,
    /// Large-d tables and the continuum expansion check.
    Asympt(AsymptArgs),
    /// Invariant suite over 1..=max-d.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Args)]
pub struct StatesArgs {
    /// Random restarts for the optimizer.
    #[arg(long, default_value_t = 32)]
    pub starts: usize,

    #[arg(long, default_value_t = 500)]
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Husimi,
    Wigner,
}

impl From<KindArg> for PhasePointKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Husimi => PhasePointKind::Husimi,
            KindArg::Wigner => PhasePointKind::Wigner,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct QuasiprobArgs {
    #[arg(long, value_enum, default_value_t = KindArg::Husimi)]
    pub kind: KindArg,

    /// Invert the Husimi grid back to a density matrix.
    #[arg(long)]
    pub reconstruct: bool,

    /// Distribution JSON file to reconstruct from instead of a random state.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AsymptArgs {
    /// Largest d of the h table.
    #[arg(long, default_value_t = 20, value_parser = parse_dim)]
    pub max_d: usize,

    /// Length scale of the continuum check; balanced when omitted.
    #[arg(long)]
    pub sigma: Option<f64>,

    /// Dimension of the continuum check.
    #[arg(long, default_value_t = 101, value_parser = parse_dim)]
    pub continuum_d: usize,

    /// Also write gnuplot scripts next to the CSV tables.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 16, value_parser = parse_dim)]
    pub max_d: usize,

    /// Random states per dimension.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
}

fn parse_dim(s: &str) -> Result<usize, String> {
    let d: usize = s.parse().map_err(|_| format!("`{s}` is not a dimension"))?;
    if !(1..=MAX_DIM).contains(&d) {
        return Err(format!("dimension must lie in [1, {MAX_DIM}]"));
    }
    Ok(d)
}

fn parse_theta(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let value = match t.strip_prefix("pi/") {
        Some(k) => {
            let k: f64 = k.parse().map_err(|_| format!("`{s}` is not an angle"))?;
            std::f64::consts::PI / k
        }
        None if t == "pi" => std::f64::consts::PI,
        None => t.parse().map_err(|_| format!("`{s}` is not an angle"))?,
    };
    if !value.is_finite() {
        return Err(format!("`{s}` is not a finite angle"));
    }
    Ok(value)
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Usage(e.to_string()))
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code: 0 on success, 1 on usage errors, 2 when an invariant
/// is violated.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let pool = thread_pool()?;
    pool.install(|| commands::dispatch(cli))
}
