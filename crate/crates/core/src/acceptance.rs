//! The acceptance suite: solves the regression fixtures at the default and
//! at a tenfold tighter tolerance, runs the diagnostics on every solution,
//! and evaluates each acceptance criterion to one pass/fail line.
//!
//! Shared by the `acceptance` test target and the `verify` command.

use std::fmt;
use std::time::Instant;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::{diagnose, fit_decay, DiagnosticsBundle, DECAY_SLOPE_TOLERANCE};
use crate::error::Result;
use crate::geometry::{ball_radius_from_geodesic, geodesic_from_ball_radius, radial_integral, RadialGrid, SpaceDim};
use crate::ode::{ExponentPair, IntegratorControls, RadialState, Trajectory};
use crate::params::{classify_exponents, sobolev_pair_interval, ClosedInterval};
use crate::shooting::{bisect_on_diagonal, find_ground_state, GroundState, SeedRegion};

/// `(N, p, q)` of the regression fixtures.
pub const FIXTURES: [(u32, f64, f64); 4] = [(3, 3.0, 3.0), (4, 2.0, 2.0), (5, 2.0, 2.0), (3, 2.0, 4.0)];

/// Wall-clock budget of one solve, seconds.
pub const SOLVE_BUDGET_SECS: f64 = 30.0;
/// Factor applied to both tolerances for the refinement runs.
pub const REFINEMENT_FACTOR: f64 = 0.1;
/// Required reduction of the dissipation residual under refinement.
pub const DISSIPATION_REDUCTION: f64 = 4.0;
/// Relative agreement of the 2-D solver with the diagonal bisection, and
/// bound on `|a - b| / a` for symmetric exponents.
pub const DIAGONAL_AGREEMENT: f64 = 1e-6;
/// Tolerance factor of the diagonal oracle runs (`rel_tol = 1e-12`).
pub const ORACLE_FACTOR: f64 = 1e-2;
/// Bracket handed to the diagonal oracle.
pub const ORACLE_BRACKET: (f64, f64) = (1.0, 1000.0);
/// Identity residual and action-route agreement bound at default tolerance.
pub const IDENTITY_BOUND: f64 = 1e-3;
/// Number of random exponent triples in the equivalence check.
pub const RANDOM_TRIPLES: usize = 10_000;
pub const RANDOM_SEED: u64 = 0x5eed_0001;

/// One evaluated criterion.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} [{}] {}: {}", self.id, self.name, self.detail)
    }
}

/// A fixture solved at one tolerance.
#[derive(Debug, Clone)]
pub struct SolvedFixture {
    pub ground_state: GroundState<f64>,
    pub diagnostics: DiagnosticsBundle<f64>,
    pub seconds: f64,
}

/// A fixture solved at the default and at the refined tolerance.
#[derive(Debug, Clone)]
pub struct FixtureRun {
    pub n: u32,
    pub p: f64,
    pub q: f64,
    pub default: std::result::Result<SolvedFixture, String>,
    pub refined: std::result::Result<SolvedFixture, String>,
    /// Diagonal bisection value for `p = q`.
    pub oracle: Option<std::result::Result<f64, String>>,
}

impl FixtureRun {
    fn label(&self) -> String {
        format!("({},{},{})", self.n, self.p, self.q)
    }
}

#[derive(Debug, Clone)]
pub struct AcceptanceReport {
    pub criteria: Vec<CriterionResult>,
    pub fixtures: Vec<FixtureRun>,
}

impl AcceptanceReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

/// Solves one fixture at the given tolerance factor and runs the diagnostics.
pub fn solve_fixture(n: u32, p: f64, q: f64, factor: f64) -> Result<SolvedFixture> {
    let dim = SpaceDim::new(n)?;
    let pq = ExponentPair::new(p, q)?;
    let ctl = IntegratorControls::default().with_tolerance_scaled(factor);
    let start = Instant::now();
    let ground_state = find_ground_state(dim, &pq, &ctl, &SeedRegion::default())?;
    let seconds = start.elapsed().as_secs_f64();
    let diagnostics = diagnose(&ground_state.trajectory, dim, &pq)?;
    Ok(SolvedFixture { ground_state, diagnostics, seconds })
}

fn diagonal_oracle(n: u32, p: f64) -> Result<f64> {
    let dim = SpaceDim::new(n)?;
    let pq = ExponentPair::new(p, p)?;
    let ctl = IntegratorControls::default().with_tolerance_scaled(ORACLE_FACTOR);
    Ok(bisect_on_diagonal(dim, &pq, &ctl, ORACLE_BRACKET.0, ORACLE_BRACKET.1)?.a)
}

/// Solves every fixture (in parallel) and evaluates all criteria.
pub fn run_acceptance() -> AcceptanceReport {
    let fixtures: Vec<FixtureRun> = FIXTURES
        .par_iter()
        .map(|&(n, p, q)| {
            let ((default, refined), oracle) = rayon::join(
                || {
                    rayon::join(
                        || solve_fixture(n, p, q, 1.0).map_err(|e| e.to_string()),
                        || solve_fixture(n, p, q, REFINEMENT_FACTOR).map_err(|e| e.to_string()),
                    )
                },
                || (p == q).then(|| diagonal_oracle(n, p).map_err(|e| e.to_string())),
            );
            FixtureRun { n, p, q, default, refined, oracle }
        })
        .collect();
    let criteria = vec![
        decay_rate(&fixtures),
        monotonicity(&fixtures),
        energy(&fixtures),
        identities(&fixtures),
        action(&fixtures),
        diagonal(&fixtures),
        exponent_arithmetic(),
        tail_sandwich(&fixtures),
        infrastructure(),
    ];
    AcceptanceReport { criteria, fixtures }
}

/// Collects per-fixture verdicts into one criterion.
fn combine(id: u8, name: &'static str, parts: Vec<(bool, String)>) -> CriterionResult {
    let passed = !parts.is_empty() && parts.iter().all(|p| p.0);
    let detail = parts.into_iter().map(|p| p.1).collect::<Vec<_>>().join("; ");
    CriterionResult { id, name, passed, detail }
}

fn both(f: &FixtureRun) -> std::result::Result<(&SolvedFixture, &SolvedFixture), String> {
    match (&f.default, &f.refined) {
        (Ok(d), Ok(r)) => Ok((d, r)),
        (Err(e), _) => Err(format!("{} default solve failed: {e}", f.label())),
        (_, Err(e)) => Err(format!("{} refined solve failed: {e}", f.label())),
    }
}

fn decay_rate(fixtures: &[FixtureRun]) -> CriterionResult {
    let parts = fixtures
        .iter()
        .map(|f| match &f.default {
            Ok(s) => {
                let d = &s.diagnostics.decay;
                let ok = d.passed && s.seconds < SOLVE_BUDGET_SECS;
                (
                    ok,
                    format!(
                        "{} dev {:.1e} <= {} in {:.2}s",
                        f.label(),
                        d.max_rel_dev,
                        DECAY_SLOPE_TOLERANCE,
                        s.seconds
                    ),
                )
            }
            Err(e) => (false, format!("{} {e}", f.label())),
        })
        .collect();
    combine(1, "decay rate", parts)
}

fn monotonicity(fixtures: &[FixtureRun]) -> CriterionResult {
    let parts = fixtures
        .iter()
        .map(|f| match both(f) {
            Ok((d, r)) => {
                let (md, mr) = (&d.diagnostics.monotone, &r.diagnostics.monotone);
                let violations = [md, mr].iter().filter(|m| !m.passed).count();
                (md.passed && mr.passed, format!("{} {violations} violations", f.label()))
            }
            Err(e) => (false, e),
        })
        .collect();
    combine(2, "monotonicity", parts)
}

fn energy(fixtures: &[FixtureRun]) -> CriterionResult {
    let parts = fixtures
        .iter()
        .map(|f| match both(f) {
            Ok((d, r)) => {
                let (ed, er) = (&d.diagnostics.energy, &r.diagnostics.energy);
                let ratio = ed.dissipation_residual / er.dissipation_residual;
                let ok = ed.passed && er.passed && ratio >= DISSIPATION_REDUCTION;
                (
                    ok,
                    format!(
                        "{} increase {:.1e} <= {:.1e}, residual {:.1e} -> {:.1e} (x{:.1})",
                        f.label(),
                        ed.max_increase,
                        ed.increase_bound,
                        ed.dissipation_residual,
                        er.dissipation_residual,
                        ratio
                    ),
                )
            }
            Err(e) => (false, e),
        })
        .collect();
    combine(3, "energy dissipation", parts)
}

fn worst(r: &[f64; 3]) -> f64 {
    r.iter().fold(0.0_f64, |a, &b| a.max(b))
}

fn identities(fixtures: &[FixtureRun]) -> CriterionResult {
    let parts = fixtures
        .iter()
        .map(|f| match both(f) {
            Ok((d, r)) => {
                let wd = worst(&d.diagnostics.identities.rel_residuals);
                let wr = worst(&r.diagnostics.identities.rel_residuals);
                (wd <= IDENTITY_BOUND && wr < wd, format!("{} residual {wd:.1e} -> {wr:.1e}", f.label()))
            }
            Err(e) => (false, e),
        })
        .collect();
    combine(4, "integral identities", parts)
}

fn action(fixtures: &[FixtureRun]) -> CriterionResult {
    let parts = fixtures
        .iter()
        .map(|f| match &f.default {
            Ok(s) => {
                let id = &s.diagnostics.identities;
                (
                    id.action > 0.0 && id.action_mismatch <= IDENTITY_BOUND,
                    format!("{} I = {:.6} routes {:.1e}", f.label(), id.action, id.action_mismatch),
                )
            }
            Err(e) => (false, format!("{} {e}", f.label())),
        })
        .collect();
    combine(5, "action positivity", parts)
}

fn diagonal(fixtures: &[FixtureRun]) -> CriterionResult {
    let parts = fixtures
        .iter()
        .filter_map(|f| {
            let oracle = f.oracle.as_ref()?;
            Some(match (&f.default, oracle) {
                (Ok(s), Ok(star)) => {
                    let gs = &s.ground_state;
                    let dev = (gs.a - star).abs().max((gs.b - star).abs()) / star;
                    let asym = (gs.a - gs.b).abs() / gs.a;
                    (
                        dev <= DIAGONAL_AGREEMENT && asym <= DIAGONAL_AGREEMENT,
                        format!("{} a* = {star:.12} dev {dev:.1e} |a-b|/a {asym:.1e}", f.label()),
                    )
                }
                (Err(e), _) => (false, format!("{} {e}", f.label())),
                (_, Err(e)) => (false, format!("{} oracle failed: {e}", f.label())),
            })
        })
        .collect();
    combine(6, "diagonal oracle", parts)
}

type Q = Ratio<i64>;

fn q(a: i64, b: i64) -> Q {
    Q::new(a, b)
}

/// One hand-checked row: `(N, p, q)`, margin, slacks, interval, existence
/// verdict and the strict ground-state verdict.
struct TruthRow {
    n: u32,
    p: Q,
    q: Q,
    margin: Q,
    slacks: (Q, Q),
    interval: Option<(Q, Q)>,
    existence: bool,
    strict: bool,
}

fn truth_table() -> Vec<TruthRow> {
    let i = |a: i64| Q::from_integer(a);
    vec![
        TruthRow {
            n: 3,
            p: i(2),
            q: i(2),
            margin: q(1, 3),
            slacks: (i(3), i(3)),
            interval: Some((q(1, 2), q(3, 2))),
            existence: true,
            strict: true,
        },
        TruthRow {
            n: 3,
            p: i(5),
            q: i(5),
            margin: i(0),
            slacks: (i(0), i(0)),
            interval: Some((i(1), i(1))),
            existence: false,
            strict: false,
        },
        TruthRow {
            n: 4,
            p: q(3, 2),
            q: q(3, 2),
            margin: q(3, 10),
            slacks: (q(3, 2), q(3, 2)),
            interval: Some((q(2, 5), q(8, 5))),
            existence: true,
            strict: true,
        },
        TruthRow {
            n: 3,
            p: i(2),
            q: i(4),
            margin: q(1, 5),
            slacks: (i(3), i(1)),
            interval: Some((q(9, 10), q(3, 2))),
            existence: true,
            strict: true,
        },
        TruthRow {
            n: 5,
            p: i(10),
            q: q(6, 5),
            margin: q(-3, 55),
            slacks: (q(-23, 3), q(17, 15)),
            interval: None,
            existence: false,
            strict: false,
        },
        TruthRow {
            n: 3,
            p: i(6),
            q: i(4),
            margin: q(1, 105),
            slacks: (i(-1), i(1)),
            interval: Some((q(9, 10), q(13, 14))),
            existence: true,
            strict: false,
        },
        TruthRow {
            n: 4,
            p: i(3),
            q: i(3),
            margin: i(0),
            slacks: (i(0), i(0)),
            interval: Some((i(1), i(1))),
            existence: false,
            strict: false,
        },
        TruthRow {
            n: 6,
            p: q(3, 2),
            q: q(3, 2),
            margin: q(2, 15),
            slacks: (q(1, 2), q(1, 2)),
            interval: Some((q(3, 5), q(7, 5))),
            existence: true,
            strict: true,
        },
    ]
}

fn check_truth_row(row: &TruthRow) -> Result<bool> {
    let dim = SpaceDim::new(row.n)?;
    let r = classify_exponents(dim, row.p, row.q)?;
    let interval = r.sobolev_interval.map(|ClosedInterval { lo, hi }| (lo, hi));
    Ok(r.hyperbola_margin == row.margin
        && (r.slack_p, r.slack_q) == row.slacks
        && interval == row.interval
        && r.verdicts.existence_hypothesis == row.existence
        && r.verdicts.ground_state_hypothesis_strict == row.strict)
}

/// `(N, p, q)` with `N` in `3..=10` and `p, q` in `(1, 20)` on a grid of
/// step `1/1000`, so that boundary cases occur and are decided exactly.
fn random_triple(rng: &mut ChaCha8Rng) -> (u32, Q, Q) {
    let n = rng.gen_range(3..=10);
    let p = q(1000 + rng.gen_range(1..19_000), 1000);
    let qq = q(1000 + rng.gen_range(1..19_000), 1000);
    (n, p, qq)
}

/// The equivalence `interval nonempty <=> margin >= 0` and
/// `interval has interior <=> margin > 0`; returns the number of violations.
pub fn equivalence_violations(count: usize, seed: u64) -> Result<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for _ in 0..count {
        let (n, p, qq) = random_triple(&mut rng);
        let dim = SpaceDim::new(n)?;
        let margin = classify_exponents(dim, p, qq)?.hyperbola_margin;
        let interval = sobolev_pair_interval(dim, p, qq)?;
        let zero = Q::from_integer(0);
        let nonempty_ok = interval.is_some() == (margin >= zero);
        let interior_ok = interval.is_some_and(|i| i.has_interior()) == (margin > zero);
        if !(nonempty_ok && interior_ok) {
            bad += 1;
        }
    }
    Ok(bad)
}

fn exponent_arithmetic() -> CriterionResult {
    let table = truth_table();
    let matched = table.iter().filter(|r| check_truth_row(r).unwrap_or(false)).count();
    let violations = equivalence_violations(RANDOM_TRIPLES, RANDOM_SEED);
    let (ok, detail) = match violations {
        Ok(v) => (
            matched == table.len() && v == 0,
            format!(
                "truth table {matched}/{} exact; equivalence violated on {v}/{RANDOM_TRIPLES} random triples",
                table.len()
            ),
        ),
        Err(e) => (false, format!("random triples: {e}")),
    };
    CriterionResult { id: 7, name: "exponent arithmetic", passed: ok, detail }
}

fn tail_sandwich(fixtures: &[FixtureRun]) -> CriterionResult {
    let parts = fixtures
        .iter()
        .map(|f| match &f.default {
            Ok(s) => {
                let tb = &s.diagnostics.tail_bounds;
                let passed = tb.iter().filter(|r| r.passed).count();
                (passed == tb.len() && !tb.is_empty(), format!("{} {passed}/{} eps", f.label(), tb.len()))
            }
            Err(e) => (false, format!("{} {e}", f.label())),
        })
        .collect();
    combine(8, "tail sandwich", parts)
}

/// Worst relative round-trip error of the coordinate maps on `[0, 50]`.
pub fn round_trip_error() -> Result<f64> {
    let mut worst = 0.0_f64;
    for i in 0..=5000 {
        let t = 50.0 * i as f64 / 5000.0;
        let back = geodesic_from_ball_radius(ball_radius_from_geodesic(t)?);
        let err = if t == 0.0 { back.abs() } else { (back - t).abs() / t };
        worst = worst.max(err);
    }
    Ok(worst)
}

/// `4 pi * integral of sinh^2 t e^(-4t)` on a dense grid over `[0, 40]`
/// against its closed form `pi / 6`.
pub fn quadrature_error() -> Result<f64> {
    let count = 40_001;
    let nodes: Vec<f64> = (0..count).map(|i| 40.0 * i as f64 / (count - 1) as f64).collect();
    let values = nodes.iter().map(|t| (-4.0 * t).exp()).collect();
    let value = radial_integral(&RadialGrid::new(nodes, values)?, SpaceDim::new(3)?)?;
    Ok((value - std::f64::consts::PI / 6.0).abs())
}

/// Worst relative slope error on the planted profile `u = v = e^(-(N-1) t)`.
pub fn planted_slope_error() -> Result<f64> {
    let mut worst = 0.0_f64;
    for n in 3..=10_u32 {
        let m = (n - 1) as f64;
        let states = (0..400)
            .map(|i| {
                let t = 0.1 + 40.0 * i as f64 / 399.0;
                let e = (-m * t).exp();
                RadialState::new(t, e, -m * e, e, -m * e)
            })
            .collect();
        let traj = Trajectory::from_states(states, 1e-10, 1e-10)?;
        worst = worst.max(fit_decay(&traj, SpaceDim::new(n)?)?.max_rel_dev);
    }
    Ok(worst)
}

fn infrastructure() -> CriterionResult {
    let run = || -> Result<(f64, f64, f64)> { Ok((round_trip_error()?, quadrature_error()?, planted_slope_error()?)) };
    match run() {
        Ok((rt, quad, slope)) => CriterionResult {
            id: 9,
            name: "infrastructure",
            passed: rt <= 1e-12 && quad <= 1e-8 && slope <= 1e-10,
            detail: format!(
                "round trip {rt:.1e} <= 1e-12; quadrature {quad:.1e} <= 1e-8; planted slope {slope:.1e} <= 1e-10"
            ),
        },
        Err(e) => CriterionResult { id: 9, name: "infrastructure", passed: false, detail: e.to_string() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truth_table_rows_hold() {
        for row in truth_table() {
            assert!(check_truth_row(&row).unwrap(), "N = {} p = {} q = {}", row.n, row.p, row.q);
        }
    }

    #[test]
    fn random_triples_are_reproducible() {
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            assert_eq!(random_triple(&mut a), random_triple(&mut b));
        }
    }

    #[test]
    fn criterion_line_format() {
        let c = CriterionResult { id: 3, name: "x", passed: false, detail: "d".into() };
        assert_eq!(c.to_string(), "FAIL [3] x: d");
    }
}
