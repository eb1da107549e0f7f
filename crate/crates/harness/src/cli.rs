//! The `setval` command line.
//!
//! Exit codes: 0 when every asserted check passes, 1 when a suite fails or
//! errors, 2 for a bad config or bad arguments.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::config::{ConfigError, ExperimentConfig};
use crate::report::{write_outputs, Format};
use crate::suites::Suite;

/// Output directory override.
pub const ENV_OUT: &str = "SETVALUED_OUT";
/// Worker thread count override.
pub const ENV_THREADS: &str = "SETVALUED_THREADS";
pub const DEFAULT_OUT: &str = "reports";

#[derive(Debug, Parser)]
#[command(name = "setval", version, about = "Run verification suites for set-valued operator inequalities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Strong (p, q) bounds with the interpolated constant C_t.
    Marcinkiewicz,
    /// Endpoint bounds of A_Q and M, and the intermediate strong bounds.
    Endpoints,
    /// A_Q on L^p of the double-dual geometric-mean norm.
    RieszThorin,
    /// A_p constants of the reverse-factorization weight.
    ReverseFactorization,
    /// Checks of the numerical building blocks.
    BodiesSelftest,
    /// The four experiment suites.
    All,
}

impl Command {
    pub fn suites(&self) -> Vec<Suite> {
        match self {
            Command::Marcinkiewicz => vec![Suite::Marcinkiewicz],
            Command::Endpoints => vec![Suite::Endpoints],
            Command::RieszThorin => vec![Suite::RieszThorin],
            Command::ReverseFactorization => vec![Suite::ReverseFactorization],
            Command::BodiesSelftest => vec![Suite::BodiesSelftest],
            Command::All => Suite::EXPERIMENTS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, clap::Args)]
pub struct Options {
    /// JSON config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Grid level k of the trial fields.
    #[arg(long, global = true)]
    pub level: Option<u32>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Also write `<suite>.plot.csv` with columns x, series, value.
    #[arg(long, global = true)]
    pub emit_plot_data: bool,
}

/// Config file, then command-line overrides, validated.
pub fn resolve_config(opts: &Options) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match &opts.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if let Some(k) = opts.level {
        cfg.level = k;
    }
    if let Some(n) = opts.trials {
        cfg.trials = n;
    }
    cfg.validate().map_err(|(key, message)| ConfigError {
        path: "command line".into(),
        line: 1,
        column: None,
        message: format!("{key}: {message}"),
    })?;
    Ok(cfg)
}

/// `--out`, then `SETVALUED_OUT`, then the config, then `reports`.
pub fn output_dir(opts: &Options, cfg: &ExperimentConfig) -> PathBuf {
    opts.out
        .clone()
        .or_else(|| std::env::var_os(ENV_OUT).filter(|v| !v.is_empty()).map(PathBuf::from))
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// `SETVALUED_THREADS`, or 0 for rayon's default.
pub fn thread_count() -> Result<usize, String> {
    match std::env::var(ENV_THREADS) {
        Ok(v) if !v.trim().is_empty() => {
            v.trim().parse().map_err(|_| format!("{ENV_THREADS}={v} is not a thread count"))
        }
        _ => Ok(0),
    }
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cfg = match resolve_config(&cli.opts) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let threads = match thread_count() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return 1;
        }
    };
    let out = output_dir(&cli.opts, &cfg);
    let mut ok = true;
    for suite in cli.command.suites() {
        ok &= run_suite(suite, &cfg, &pool, &out, &cli.opts);
    }
    if ok {
        0
    } else {
        1
    }
}

fn run_suite(suite: Suite, cfg: &ExperimentConfig, pool: &rayon::ThreadPool, out: &Path, opts: &Options) -> bool {
    let start = Instant::now();
    log::info!("running {} with seed {}", suite.name(), cfg.seed);
    let result = pool.install(|| suite.run(cfg));
    let secs = start.elapsed().as_secs_f64();
    let output = match result {
        Ok(o) => o,
        Err(e) => {
            println!("FAIL {}: error: {e} ({secs:.2}s)", suite.name());
            return false;
        }
    };
    let path = match write_outputs(&output, out, opts.format, opts.emit_plot_data) {
        Ok(p) => p,
        Err(e) => {
            println!("FAIL {}: cannot write report under {}: {e} ({secs:.2}s)", suite.name(), out.display());
            return false;
        }
    };
    let r = &output.report;
    let checks = r.aggregate.checks.len();
    if r.passed() {
        println!(
            "PASS {}: {checks} checks, {} records ({secs:.2}s) -> {}",
            suite.name(),
            r.trials.len(),
            path.display()
        );
    } else {
        let failed = r.failures();
        let first = failed[0];
        println!(
            "FAIL {}: {} of {checks} checks failed; first: {} (measured {}, bound {}) ({secs:.2}s) -> {}",
            suite.name(),
            failed.len(),
            first.name,
            first.measured,
            first.bound,
            path.display()
        );
    }
    r.passed()
}
