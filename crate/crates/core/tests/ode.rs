mod common;

use common::{dim, pair, rk4_diagonal, RefOutcome, DIAGONAL_A_STAR};
use hypershoot::{energy_j, integrate, odd_pow, IntegrateError, IntegratorControls, ShootingOutcome, Trajectory};
use proptest::prelude::*;

/// First zero of the diagonal run from `a = b = 10`, `N = 3`, `p = q = 3`,
/// frozen from the reference RK4 integrator at `h = 1e-4`.
const T_CROSS_10: f64 = 0.7398475025180116;
/// Same from `a = b = 50` at `h = 1e-5`.
const T_CROSS_50: f64 = 0.13828333093096556;

fn ctl() -> IntegratorControls<f64> {
    IntegratorControls::default()
}

#[test]
fn reference_integrator_reproduces_frozen_crossings() {
    let r = rk4_diagonal(10.0, 3, 3.0, 1e-4, 60.0, 1e6, |_, _, _| ());
    assert_eq!(r, RefOutcome::Crossed(T_CROSS_10));
    // step-size independence of the reference value
    match rk4_diagonal(10.0, 3, 3.0, 5e-5, 60.0, 1e6, |_, _, _| ()) {
        RefOutcome::Crossed(t) => assert!((t - T_CROSS_10).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
    let r = rk4_diagonal(50.0, 3, 3.0, 1e-5, 60.0, 1e6, |_, _, _| ());
    assert_eq!(r, RefOutcome::Crossed(T_CROSS_50));
}

#[test]
fn large_symmetric_data_crosses() {
    let (_, o) = integrate(10.0, 10.0, dim(3), &pair(3.0, 3.0), &ctl()).unwrap();
    // u and v coincide on the diagonal, so the tie goes to u
    match o {
        ShootingOutcome::UCrossed { t_cross } => assert!((t_cross - T_CROSS_10).abs() < 1e-8 * T_CROSS_10),
        other => panic!("{other:?}"),
    }
    let (_, o) = integrate(50.0, 50.0, dim(3), &pair(3.0, 3.0), &ctl()).unwrap();
    match o {
        ShootingOutcome::UCrossed { t_cross } => assert!((t_cross - T_CROSS_50).abs() < 1e-8 * T_CROSS_50),
        other => panic!("{other:?}"),
    }
}

#[test]
fn ground_state_data_decays() {
    for (n, p, a) in DIAGONAL_A_STAR {
        let (traj, o) = integrate(a, a, dim(n), &pair(p, p), &ctl()).unwrap();
        assert!(o.is_decay(), "N = {n}: {o:?}");
        for (i, s) in traj.states().iter().enumerate() {
            assert!(s.u > 0.0 && s.v > 0.0);
            if i > 0 {
                assert!(s.du < 0.0 && s.dv < 0.0);
            }
        }
    }
}

#[test]
fn short_span_is_undetermined() {
    let c = IntegratorControls { t_max: 0.02, t0: 0.01, ..ctl() };
    let (traj, o) = integrate(1.0, 1.0, dim(3), &pair(2.0, 2.0), &c).unwrap();
    assert_eq!(o, ShootingOutcome::Undetermined { t_max: 0.02 });
    assert_eq!(traj.last().unwrap().t, 0.02);
}

#[test]
fn invalid_controls_name_the_key() {
    let c = IntegratorControls { t0: 0.5, ..ctl() };
    let e = integrate(1.0, 1.0, dim(3), &pair(2.0, 2.0), &c).unwrap_err();
    assert!(e.to_string().contains("t0"), "{e}");
    let c = IntegratorControls { rel_tol: -1.0, ..ctl() };
    assert!(integrate(1.0, 1.0, dim(3), &pair(2.0, 2.0), &c).unwrap_err().to_string().contains("rel_tol"));
    assert!(matches!(integrate(-1.0, 1.0, dim(3), &pair(2.0, 2.0), &ctl()), Err(IntegrateError::Invalid(_))));
}

#[test]
fn unreachable_tolerance_fails_with_partial_trajectory() {
    let c = IntegratorControls { rel_tol: 1e-30, abs_tol: 1e-30, ..ctl() };
    match integrate(1.0, 1.0, dim(3), &pair(2.0, 2.0), &c) {
        Err(IntegrateError::Failed(f)) => {
            assert!(!f.partial.is_empty());
            assert!(f.t >= c.t0);
        }
        other => panic!("expected an integration failure, got {other:?}"),
    }
}

#[test]
fn series_start_consistency() {
    let pq = pair(3.0, 2.0);
    let c1 = IntegratorControls { t_max: 0.2, t0: 0.02, ..ctl() };
    let c2 = IntegratorControls { t0: 0.01, ..c1 };
    let (t1, _) = integrate(2.0, 1.5, dim(4), &pq, &c1).unwrap();
    let (t2, _) = integrate(2.0, 1.5, dim(4), &pq, &c2).unwrap();
    let (s1, s2) = (t1.last().unwrap(), t2.last().unwrap());
    assert_eq!((s1.t, s2.t), (0.2, 0.2));
    for (x, y) in [(s1.u, s2.u), (s1.du, s2.du), (s1.v, s2.v), (s1.dv, s2.dv)] {
        assert!((x - y).abs() <= 10.0 * c1.rel_tol * x.abs().max(1.0), "{x} vs {y}");
    }
}

/// Largest `|Δ(k u') + trapezoid of k |v|^(p-1) v|` over the steps of a
/// crossing-free stretch, relative to `max |k u'|`.
fn self_adjoint_residual(traj: &Trajectory<f64>, n: u32, p: f64) -> f64 {
    let m = (n - 1) as i32;
    let k = |t: f64| t.sinh().powi(m);
    let s = traj.states();
    let flux: Vec<f64> = s.iter().map(|x| k(x.t) * x.du).collect();
    let source: Vec<f64> = s.iter().map(|x| k(x.t) * odd_pow(x.v, p)).collect();
    let scale = flux.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    (1..s.len())
        .map(|i| {
            let h = s[i].t - s[i - 1].t;
            (flux[i] - flux[i - 1] + 0.5 * h * (source[i] + source[i - 1])).abs() / scale
        })
        .fold(0.0, f64::max)
}

#[test]
fn self_adjoint_form_holds_to_quadrature_order() {
    let pq = pair(2.0, 4.0);
    let loose = IntegratorControls { rel_tol: 1e-8, abs_tol: 1e-8, t_max: 3.0, ..ctl() };
    let tight = IntegratorControls { rel_tol: 1e-11, abs_tol: 1e-11, ..loose };
    let (tl, _) = integrate(3.0, 7.0, dim(3), &pq, &loose).unwrap();
    let (tt, _) = integrate(3.0, 7.0, dim(3), &pq, &tight).unwrap();
    let (rl, rt) = (self_adjoint_residual(&tl, 3, 2.0), self_adjoint_residual(&tt, 3, 2.0));
    // steps shrink like tol^(1/8), the trapezoid error like h^3
    assert!(rl < 1e-2 && rt * 5.0 < rl, "{rl} -> {rt}");
}

#[test]
fn csv_export_schema() {
    let c = IntegratorControls { t_max: 1.0, ..ctl() };
    let (traj, _) = integrate(1.0, 2.0, dim(3), &pair(2.0, 2.0), &c).unwrap();
    let csv = traj.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,u,du,v,dv"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), traj.len());
    for (row, s) in rows.iter().zip(traj.states()) {
        let fields: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        // 17 significant digits round-trip f64 exactly
        assert_eq!(fields, vec![s.t, s.u, s.du, s.v, s.dv]);
    }
}

#[test]
fn single_precision_integration() {
    let c = IntegratorControls::<f32> { rel_tol: 1e-5, abs_tol: 1e-5, ..Default::default() };
    let (_, o) = integrate(10.0_f32, 10.0, dim(3), &hypershoot::ExponentPair::new(3.0_f32, 3.0).unwrap(), &c).unwrap();
    match o {
        ShootingOutcome::UCrossed { t_cross } => assert!((t_cross as f64 - T_CROSS_10).abs() < 1e-4),
        other => panic!("{other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn diagonal_is_invariant(a in 0.5_f64..200.0, n in 3_u32..7, p in 1.2_f64..4.0) {
        let c = IntegratorControls { t_max: 20.0, ..ctl() };
        let (traj, _) = integrate(a, a, dim(n), &pair(p, p), &c).unwrap();
        for s in traj.states() {
            prop_assert!((s.u - s.v).abs() <= 100.0 * c.rel_tol * a.max(1.0));
            prop_assert!((s.du - s.dv).abs() <= 100.0 * c.rel_tol * a.max(1.0));
        }
    }

    #[test]
    fn event_is_tolerance_robust(a in 6.0_f64..40.0, b in 6.0_f64..40.0) {
        let pq = pair(3.0, 3.0);
        let c1 = ctl();
        let c2 = IntegratorControls { t0: c1.t0 / 2.0, ..c1.with_tolerance_scaled(0.5) };
        let (_, o1) = integrate(a, b, dim(3), &pq, &c1).unwrap();
        let (_, o2) = integrate(a, b, dim(3), &pq, &c2).unwrap();
        prop_assert!(o1.overshoots(), "{:?}", o1);
        prop_assert!(o1.same_variant(&o2), "{:?} vs {:?}", o1, o2);
        prop_assert!((o1.time() - o2.time()).abs() <= 10.0 * c1.rel_tol * o1.time(), "{:?} vs {:?}", o1, o2);
    }

    #[test]
    fn energy_does_not_increase(a in 0.5_f64..30.0, b in 0.5_f64..30.0, p in 1.5_f64..4.0, q in 1.5_f64..4.0) {
        let pq = pair(p, q);
        let c = IntegratorControls { t_max: 20.0, ..ctl() };
        let (traj, _) = integrate(a, b, dim(3), &pq, &c).unwrap();
        let j: Vec<f64> = traj.states().iter().map(|s| energy_j(s, &pq)).collect();
        let bound = 100.0 * c.rel_tol * j[0].abs();
        for w in j.windows(2) {
            prop_assert!(w[1] - w[0] <= bound, "{} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn small_symmetric_data_is_undetermined() {
    // The reference run is still positive at t = 60: small data settle into
    // the linear decaying regime far slower than the horizon allows.
    match rk4_diagonal(1e-3, 3, 3.0, 1e-3, 60.0, 1e6, |_, _, _| ()) {
        RefOutcome::Running(t, u, du) => assert!(t >= 59.999 && u > 9e-4 && du.abs() < 1e-6, "{u} {du}"),
        other => panic!("{other:?}"),
    }
    let (_, o) = integrate(1e-3, 1e-3, dim(3), &pair(3.0, 3.0), &ctl()).unwrap();
    assert!(matches!(o, ShootingOutcome::Undetermined { .. }), "{o:?}");
}
