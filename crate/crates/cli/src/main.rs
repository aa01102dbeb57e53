//! `hypershoot`: classify exponents, solve for ground states, sweep grids
//! and run the verification suite.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 diagnostics
//! failure, 3 no convergence.

// `!(x > y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{CommandError, SweepMode, EXIT_CONFIG};
use config::{ConfigError, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "hypershoot", version, about = "Radial ground states of Lane-Emden systems on hyperbolic space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the exponent-regime classification of (N, p, q) as JSON.
    Classify,
    /// Find the ground state; writes ground_state.csv and report.json.
    Solve,
    /// Sweep an exponent grid (regime.csv) or an initial-data grid (outcomes.csv).
    Sweep {
        #[arg(value_enum)]
        mode: SweepMode,
    },
    /// Run the acceptance suite and print a pass/fail table.
    Verify,
}

/// Settings; each overrides the config file, which overrides the defaults.
#[derive(Args, Debug, Default)]
struct Opts {
    /// Flat `key = value` file, or a report.json whose config echo is reused.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Dimension of the hyperbolic space (>= 3).
    #[arg(long = "N", global = true, allow_hyphen_values = true)]
    n: Option<String>,
    /// Exponent of v in the equation for u.
    #[arg(long, global = true, allow_hyphen_values = true)]
    p: Option<String>,
    /// Exponent of u in the equation for v.
    #[arg(long, global = true, allow_hyphen_values = true)]
    q: Option<String>,
    #[arg(long = "rel-tol", global = true, allow_hyphen_values = true)]
    rel_tol: Option<String>,
    #[arg(long = "abs-tol", global = true, allow_hyphen_values = true)]
    abs_tol: Option<String>,
    /// Start of the numerical integration after the series expansion.
    #[arg(long, global = true, allow_hyphen_values = true)]
    t0: Option<String>,
    /// Integration horizon.
    #[arg(long = "T-max", global = true, allow_hyphen_values = true)]
    t_max: Option<String>,
    #[arg(long = "blowup-threshold", global = true, allow_hyphen_values = true)]
    blowup_threshold: Option<String>,
    #[arg(long = "decay-margin", global = true, allow_hyphen_values = true)]
    decay_margin: Option<String>,
    /// Lower corner of the initial-data search box.
    #[arg(long = "seed-lo", global = true, allow_hyphen_values = true)]
    seed_lo: Option<String>,
    /// Upper corner of the initial-data search box.
    #[arg(long = "seed-hi", global = true, allow_hyphen_values = true)]
    seed_hi: Option<String>,
    #[arg(long = "seed-points", global = true, allow_hyphen_values = true)]
    seed_points: Option<String>,
    /// Worker threads (0: all cores).
    #[arg(long, global = true, allow_hyphen_values = true)]
    jobs: Option<String>,
    #[arg(long = "out-dir", global = true, allow_hyphen_values = true)]
    out_dir: Option<String>,
    /// Attempt a solve even when the existence hypothesis fails.
    #[arg(long = "override-regime", global = true)]
    override_regime: bool,
    /// Exponent axis `lo:hi:count` of `sweep pq`.
    #[arg(long = "grid-p", global = true, allow_hyphen_values = true)]
    grid_p: Option<String>,
    #[arg(long = "grid-q", global = true, allow_hyphen_values = true)]
    grid_q: Option<String>,
    /// Initial-data axis `lo:hi:count` of `sweep ab`.
    #[arg(long = "grid-a", global = true, allow_hyphen_values = true)]
    grid_a: Option<String>,
    #[arg(long = "grid-b", global = true, allow_hyphen_values = true)]
    grid_b: Option<String>,
    /// Geometric spacing of the initial-data grid.
    #[arg(long = "log-grid", global = true)]
    log_grid: bool,
}

impl Opts {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let text = [
            ("N", &self.n),
            ("p", &self.p),
            ("q", &self.q),
            ("rel-tol", &self.rel_tol),
            ("abs-tol", &self.abs_tol),
            ("t0", &self.t0),
            ("T-max", &self.t_max),
            ("blowup-threshold", &self.blowup_threshold),
            ("decay-margin", &self.decay_margin),
            ("seed-lo", &self.seed_lo),
            ("seed-hi", &self.seed_hi),
            ("seed-points", &self.seed_points),
            ("jobs", &self.jobs),
            ("out-dir", &self.out_dir),
            ("grid-p", &self.grid_p),
            ("grid-q", &self.grid_q),
            ("grid-a", &self.grid_a),
            ("grid-b", &self.grid_b),
        ];
        let mut out: Vec<(&'static str, String)> =
            text.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k, v))).collect();
        if self.override_regime {
            out.push(("override-regime", "true".into()));
        }
        if self.log_grid {
            out.push(("log-grid", "true".into()));
        }
        out
    }

    fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        for (key, value) in self.pairs() {
            cfg.set(key, &value)?;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<u8, CommandError> {
    let cfg = cli.opts.resolve()?;
    match cli.command {
        Command::Classify => commands::classify(&cfg),
        Command::Solve => commands::solve(&cfg),
        Command::Sweep { mode } => commands::sweep(&cfg, mode),
        Command::Verify => commands::verify(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
