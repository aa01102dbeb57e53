//! The four commands. Each returns the process exit code; output files are
//! written once, after all work has finished.

use std::fs;
use std::io::Write;
use std::path::Path;

use hypershoot::acceptance::run_acceptance;
use hypershoot::{
    classify_exponents, classify_outcome, diagnose, find_ground_state, DiagnosticsBundle, ExponentRegime, GroundState,
    ShootingOutcome,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ConfigError, RunConfig};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_DIAGNOSTICS: u8 = 2;
pub const EXIT_NO_CONVERGENCE: u8 = 3;

/// Failure of a command before it produced its result.
#[derive(Debug)]
pub enum CommandError {
    Config(ConfigError),
    Io(String),
}

impl From<ConfigError> for CommandError {
    fn from(e: ConfigError) -> Self {
        CommandError::Config(e)
    }
}

impl std::fmt::Display for CommandError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CommandError::Config(e) => e.fmt(f),
            CommandError::Io(m) => f.write_str(m),
        }
    }
}

impl CommandError {
    pub fn exit_code(&self) -> u8 {
        // unwritable outputs are a usage problem as well
        EXIT_CONFIG
    }
}

type CmdResult = Result<u8, CommandError>;

fn pool(cfg: &RunConfig) -> Result<rayon::ThreadPool, CommandError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CommandError::Io(format!("cannot start worker pool: {e}")))
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CommandError> {
    fs::create_dir_all(dir).map_err(|e| CommandError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| CommandError::Io(format!("cannot write {}: {e}", path.display())))
}

fn write_report(cfg: &RunConfig, command: &str, body: Value) -> Result<(), CommandError> {
    let mut report = json!({
        "schema_version": SCHEMA_VERSION,
        "tool": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "command": command,
        "config": cfg,
    });
    if let (Value::Object(r), Value::Object(b)) = (&mut report, body) {
        r.extend(b);
    }
    let text = serde_json::to_string_pretty(&report).expect("report is plain data");
    write_file(&cfg.out_dir, "report.json", text.as_bytes())
}

/// Prints the classification of `(N, p, q)` as JSON.
pub fn classify(cfg: &RunConfig) -> CmdResult {
    let n = cfg.dim()?;
    cfg.pair()?;
    let regime = classify_exponents(n, cfg.p, cfg.q).map_err(|e| ConfigError::new("p", e.to_string()))?;
    let text = serde_json::to_string_pretty(&regime).expect("regime is plain data");
    // a closed pipe downstream is not an error of the classification
    let _ = writeln!(std::io::stdout(), "{text}");
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct Solution<'a> {
    a: f64,
    b: f64,
    residual: f64,
    residual_bound: f64,
    residual_time: f64,
    converged: bool,
    newton_iterations: usize,
    match_point: f64,
    outcome: &'a ShootingOutcome<f64>,
    trajectory_nodes: usize,
}

#[derive(Serialize)]
struct DiagnosticsSummary<'a> {
    passed: bool,
    failures: Vec<&'static str>,
    #[serde(flatten)]
    bundle: &'a DiagnosticsBundle<f64>,
}

fn solution(g: &GroundState<f64>) -> Solution<'_> {
    Solution {
        a: g.a,
        b: g.b,
        residual: g.residual,
        residual_bound: g.residual_bound,
        residual_time: g.residual_time,
        converged: g.polished,
        newton_iterations: g.newton_iterations,
        match_point: g.match_point,
        outcome: &g.outcome,
        trajectory_nodes: g.trajectory.len(),
    }
}

/// Solves for the ground state of the configured triple.
pub fn solve(cfg: &RunConfig) -> CmdResult {
    let n = cfg.dim()?;
    let pq = cfg.pair()?;
    cfg.validate_run()?;
    let regime = classify_exponents(n, cfg.p, cfg.q).map_err(|e| ConfigError::new("p", e.to_string()))?;
    if !regime.verdicts.existence_hypothesis && !cfg.override_regime {
        return Err(ConfigError::new(
            "p",
            format!(
                "strict hyperbola check 1/(p+1) + 1/(q+1) > (N-2)/N fails for N = {}, p = {}, q = {} \
                 (margin {:e}); pass --override-regime to attempt the solve anyway",
                cfg.n, cfg.p, cfg.q, regime.hyperbola_margin
            ),
        )
        .into());
    }
    let (ctl, seed) = (cfg.controls(), cfg.seed());
    let found = pool(cfg)?.install(|| find_ground_state(n, &pq, &ctl, &seed));
    let g = match found {
        Ok(g) => g,
        Err(e) => {
            eprintln!("no ground state: {e}");
            write_report(cfg, "solve", json!({ "regime": regime, "status": "not_converged", "error": e.to_string() }))?;
            return Ok(EXIT_NO_CONVERGENCE);
        }
    };
    let mut csv = Vec::new();
    g.trajectory.write_csv(&mut csv).map_err(|e| CommandError::Io(e.to_string()))?;
    write_file(&cfg.out_dir, "ground_state.csv", &csv)?;

    let diagnostics = diagnose(&g.trajectory, n, &pq);
    let (status, code, diag_value) = match (&diagnostics, g.polished) {
        (_, false) => ("not_converged", EXIT_NO_CONVERGENCE, diagnostics_value(&diagnostics)),
        (Ok(d), true) if d.passed() => ("ok", EXIT_OK, diagnostics_value(&diagnostics)),
        (_, true) => ("diagnostics_failed", EXIT_DIAGNOSTICS, diagnostics_value(&diagnostics)),
    };
    write_report(
        cfg,
        "solve",
        json!({ "regime": regime, "status": status, "solution": solution(&g), "diagnostics": diag_value }),
    )?;
    println!("a = {:.12}, b = {:.12}, residual = {:.3e} ({status})", g.a, g.b, g.residual);
    if let Ok(d) = &diagnostics {
        println!(
            "decay slopes u2 {:.4} v2 {:.4} du2 {:.4} dv2 {:.4} (target {})",
            d.decay.slope_u2, d.decay.slope_v2, d.decay.slope_du2, d.decay.slope_dv2, d.decay.target
        );
        println!("action {:.9}, failed checks: {:?}", d.identities.action, d.failures());
    }
    Ok(code)
}

fn diagnostics_value(d: &hypershoot::Result<DiagnosticsBundle<f64>>) -> Value {
    match d {
        Ok(bundle) => {
            serde_json::to_value(DiagnosticsSummary { passed: bundle.passed(), failures: bundle.failures(), bundle })
                .expect("diagnostics are plain data")
        }
        Err(e) => json!({ "passed": false, "error": e.to_string() }),
    }
}

/// Which pair of parameters a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepMode {
    /// Exponent grid: writes `regime.csv`.
    Pq,
    /// Initial-data grid: writes `outcomes.csv`.
    Ab,
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| v.to_string())
}

/// Classification rows of an exponent grid, row-major over `(p, q)`.
pub fn regime_rows(cfg: &RunConfig) -> Result<Vec<ExponentRegime<f64>>, CommandError> {
    let n = cfg.dim()?;
    RunConfig::validate_grid("grid-p", &cfg.grid_p, false)?;
    RunConfig::validate_grid("grid-q", &cfg.grid_q, false)?;
    for (key, g) in [("grid-p", &cfg.grid_p), ("grid-q", &cfg.grid_q)] {
        if !(g.lo > 1.0) {
            return Err(ConfigError::new(key, "exponents must exceed 1").into());
        }
    }
    let cells: Vec<(f64, f64)> = cfg
        .grid_p
        .values(false)
        .into_iter()
        .flat_map(|p| cfg.grid_q.values(false).into_iter().map(move |q| (p, q)))
        .collect();
    pool(cfg)?.install(|| {
        cells
            .par_iter()
            .map(|&(p, q)| classify_exponents(n, p, q).map_err(|e| ConfigError::new("grid-p", e.to_string()).into()))
            .collect()
    })
}

/// First events over an initial-data grid, row-major over `(a, b)`.
pub fn outcome_rows(cfg: &RunConfig) -> Result<Vec<(f64, f64, String, f64)>, CommandError> {
    let n = cfg.dim()?;
    let pq = cfg.pair()?;
    cfg.validate_run()?;
    RunConfig::validate_grid("grid-a", &cfg.grid_a, cfg.log_grid)?;
    RunConfig::validate_grid("grid-b", &cfg.grid_b, cfg.log_grid)?;
    for (key, g) in [("grid-a", &cfg.grid_a), ("grid-b", &cfg.grid_b)] {
        if !(g.lo > 0.0) {
            return Err(ConfigError::new(key, "initial data must be positive").into());
        }
    }
    let ctl = cfg.controls();
    let cells: Vec<(f64, f64)> = cfg
        .grid_a
        .values(cfg.log_grid)
        .into_iter()
        .flat_map(|a| cfg.grid_b.values(cfg.log_grid).into_iter().map(move |b| (a, b)))
        .collect();
    Ok(pool(cfg)?.install(|| {
        cells
            .par_iter()
            .map(|&(a, b)| match classify_outcome(a, b, n, &pq, &ctl) {
                Ok(o) => (a, b, o.label().to_string(), o.time()),
                Err(hypershoot::Error::IntegrationFailed { t, .. }) => (a, b, "failed".to_string(), t),
                Err(_) => (a, b, "failed".to_string(), f64::NAN),
            })
            .collect()
    }))
}

/// Sweeps the configured grid.
pub fn sweep(cfg: &RunConfig, mode: SweepMode) -> CmdResult {
    match mode {
        SweepMode::Pq => {
            let rows = regime_rows(cfg)?;
            let mut csv = String::from("p,q,hyperbola_margin,subcritical_p,subcritical_q,s_lo,s_hi\n");
            for r in &rows {
                let s = r.sobolev_interval;
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    r.p,
                    r.q,
                    r.hyperbola_margin,
                    r.slack_p >= 0.0,
                    r.slack_q >= 0.0,
                    fmt_opt(s.map(|i| i.lo)),
                    fmt_opt(s.map(|i| i.hi))
                ));
            }
            write_file(&cfg.out_dir, "regime.csv", csv.as_bytes())?;
            let existing = rows.iter().filter(|r| r.verdicts.existence_hypothesis).count();
            write_report(cfg, "sweep", json!({ "mode": "pq", "cells": rows.len(), "existence_cells": existing }))?;
            println!("{} cells, {existing} above the critical hyperbola", rows.len());
        }
        SweepMode::Ab => {
            let rows = outcome_rows(cfg)?;
            let mut csv = String::from("a,b,outcome,event_t\n");
            let mut counts = std::collections::BTreeMap::<&str, usize>::new();
            for (a, b, label, t) in &rows {
                csv.push_str(&format!("{a},{b},{label},{t}\n"));
                *counts.entry(label.as_str()).or_default() += 1;
            }
            write_file(&cfg.out_dir, "outcomes.csv", csv.as_bytes())?;
            write_report(cfg, "sweep", json!({ "mode": "ab", "cells": rows.len(), "outcome_counts": counts }))?;
            println!("{} cells: {counts:?}", rows.len());
        }
    }
    Ok(EXIT_OK)
}

/// Runs the acceptance suite and prints one line per criterion.
pub fn verify(cfg: &RunConfig) -> CmdResult {
    let report = pool(cfg)?.install(run_acceptance);
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for c in &report.criteria {
        writeln!(out, "{c}").map_err(|e| CommandError::Io(e.to_string()))?;
    }
    let passed = report.criteria.iter().filter(|c| c.passed).count();
    writeln!(out, "{passed}/{} criteria passed", report.criteria.len()).map_err(|e| CommandError::Io(e.to_string()))?;
    write_report(cfg, "verify", json!({ "passed": report.passed(), "criteria": report.criteria }))?;
    Ok(if report.passed() { EXIT_OK } else { EXIT_DIAGNOSTICS })
}
