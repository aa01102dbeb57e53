mod common;

use std::f64::consts::PI;
use std::sync::OnceLock;

use common::{dim, pair, rk4_diagonal, ASYMMETRIC_FIXTURE, DIAGONAL_A_STAR};
use hypershoot::{
    characteristic_tail_bound, check_energy_dissipation, check_identities, check_monotone, diagnose, find_ground_state,
    fit_decay, integrate, DiagnosticsBundle, Error, GroundState, IntegratorControls, SeedRegion,
};

/// Action of the `(3, 3, 3)` ground state, frozen from the library.
const ACTION_333: f64 = 40.520667;

fn solve(n: u32, p: f64, q: f64, factor: f64) -> GroundState<f64> {
    let ctl = IntegratorControls::default().with_tolerance_scaled(factor);
    find_ground_state(dim(n), &pair(p, q), &ctl, &SeedRegion::default()).unwrap()
}

fn ground_333() -> &'static (GroundState<f64>, DiagnosticsBundle<f64>) {
    static CELL: OnceLock<(GroundState<f64>, DiagnosticsBundle<f64>)> = OnceLock::new();
    CELL.get_or_init(|| {
        let g = solve(3, 3.0, 3.0, 1.0);
        let d = diagnose(&g.trajectory, dim(3), &pair(3.0, 3.0)).unwrap();
        (g, d)
    })
}

#[test]
fn ground_state_passes_every_check() {
    let (_, d) = ground_333();
    assert!(d.passed(), "{:?}", d.failures());
    assert!(d.monotone.max_derivative < 0.0);
    assert!(d.energy.max_increase <= d.energy.increase_bound);
}

#[test]
fn decay_slopes_match_the_linearisation() {
    for (n, p, q) in [(3, 3.0, 3.0), (4, 2.0, 2.0), (3, 2.0, 4.0)] {
        let g = solve(n, p, q, 1.0);
        let r = fit_decay(&g.trajectory, dim(n)).unwrap();
        let target = -2.0 * (n - 1) as f64;
        assert_eq!(r.target, target);
        for s in [r.slope_u2, r.slope_v2, r.slope_du2, r.slope_dv2] {
            assert!((s - target).abs() <= 0.05 * target.abs(), "N = {n}: slope {s}");
        }
        assert!(r.passed);
    }
}

#[test]
fn dissipation_residual_shrinks_under_refinement() {
    let (a, b) = ASYMMETRIC_FIXTURE;
    let pq = pair(2.0, 4.0);
    let run = |factor: f64| {
        let ctl = IntegratorControls::default().with_tolerance_scaled(factor);
        let (traj, _) = integrate(a, b, dim(3), &pq, &ctl).unwrap();
        check_energy_dissipation(&traj, dim(3), &pq).unwrap().dissipation_residual
    };
    let (coarse, fine) = (run(1.0), run(0.1));
    assert!(coarse >= 4.0 * fine, "{coarse} -> {fine}");
}

#[test]
fn tail_sandwich_holds_for_several_eps() {
    let (g, d) = ground_333();
    assert_eq!(d.tail_bounds.len(), 3);
    for r in &d.tail_bounds {
        assert!(r.applicable && r.passed, "{r:?}");
        assert!(r.roots.mu_minus < r.roots.nu_minus);
    }
    // larger eps admits an earlier start
    let t: Vec<f64> = d.tail_bounds.iter().map(|r| r.t_eps.unwrap()).collect();
    assert!(t[0] >= t[1] && t[1] >= t[2], "{t:?}");
    // a run that never enters the linear regime is reported, not faked
    let (_, _, a_star) = DIAGONAL_A_STAR[0];
    let ctl = IntegratorControls { t_max: 2.0, ..IntegratorControls::default() };
    let (short, _) = integrate(a_star, a_star, dim(3), &pair(3.0, 3.0), &ctl).unwrap();
    let r = characteristic_tail_bound(&short, dim(3), &pair(3.0, 3.0), 0.01).unwrap();
    assert!(!r.applicable && !r.passed);
    assert!(characteristic_tail_bound(&g.trajectory, dim(3), &pair(3.0, 3.0), 0.0).is_err());
}

#[test]
fn identities_match_the_reference_integrator() {
    let (_, _, a_star) = DIAGONAL_A_STAR[0];
    // On the diagonal A = ∫|S| sinh^2 u'^2 and B = C = ∫|S| sinh^2 u^4.
    let (h, area) = (1e-4, 4.0 * PI);
    let (mut a_int, mut b_int, mut prev) = (0.0, 0.0, None::<(f64, f64)>);
    rk4_diagonal(a_star, 3, 3.0, h, 12.0, 1e6, |t, u, du| {
        let k = t.sinh().powi(2) * area;
        let f = (k * du * du, k * u.powi(4));
        if let Some(g) = prev {
            a_int += 0.5 * h * (f.0 + g.0);
            b_int += 0.5 * h * (f.1 + g.1);
        }
        prev = Some(f);
    });
    // u ~ e^(-2t): the truncated tail is far below the comparison level
    let (g, _) = ground_333();
    let r = check_identities(&g.trajectory, dim(3), &pair(3.0, 3.0)).unwrap();
    assert!((r.a - a_int).abs() < 1e-6 * a_int, "{} vs {a_int}", r.a);
    assert!((r.b - b_int).abs() < 1e-6 * b_int, "{} vs {b_int}", r.b);
    assert!((r.action - 0.5 * b_int).abs() < 1e-6 * b_int);
    assert!((r.action - ACTION_333).abs() < 1e-6 * ACTION_333, "{}", r.action);
    assert!((r.action_direct - r.action).abs() < r.tolerance * r.action);
    assert!(r.passed);
}

#[test]
fn identity_residuals_tighten_with_tolerance() {
    let coarse = solve(3, 2.0, 4.0, 1.0);
    let fine = solve(3, 2.0, 4.0, 0.1);
    let pq = pair(2.0, 4.0);
    let rc = check_identities(&coarse.trajectory, dim(3), &pq).unwrap();
    let rf = check_identities(&fine.trajectory, dim(3), &pq).unwrap();
    let worst = |r: &[f64; 3]| r.iter().cloned().fold(0.0, f64::max);
    assert!(rc.passed && rf.passed);
    assert!(worst(&rf.rel_residuals) <= worst(&rc.rel_residuals), "{:?} vs {:?}", rc.rel_residuals, rf.rel_residuals);
}

#[test]
fn overshooting_runs_are_rejected() {
    let pq = pair(3.0, 3.0);
    let (traj, o) = integrate(10.0, 10.0, dim(3), &pq, &IntegratorControls::default()).unwrap();
    assert!(o.overshoots());
    assert!(check_identities(&traj, dim(3), &pq).is_err());
    assert!(fit_decay(&traj, dim(3)).is_err());
    // the monotone check runs on anything and reports the failure
    let m = check_monotone(&traj).unwrap();
    assert!(m.passed || m.first_violation.is_some());
}

#[test]
fn short_runs_report_a_window_error() {
    let ctl = IntegratorControls { t_max: 12.0, decay_margin: 0.0, ..IntegratorControls::default() };
    let (_, _, a_star) = DIAGONAL_A_STAR[0];
    let (traj, _) = integrate(a_star, a_star, dim(3), &pair(3.0, 3.0), &ctl).unwrap();
    match fit_decay(&traj, dim(3)) {
        Err(Error::Window { width, required }) => assert!(width < required),
        other => panic!("{other:?}"),
    }
}
