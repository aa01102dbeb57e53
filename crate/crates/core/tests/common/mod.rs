//! Independent reference integrator for the symmetric reduction
//! `u'' + (N-1) coth(t) u' + |u|^(p-1) u = 0`, `u(0) = a`, `u'(0) = 0`:
//! classical fixed-step RK4 from a two-term series start, sharing no code
//! with the library.

#![allow(dead_code)]

use hypershoot::{ExponentPair, SpaceDim};

pub fn dim(n: u32) -> SpaceDim {
    SpaceDim::new(n).unwrap()
}

pub fn pair(p: f64, q: f64) -> ExponentPair<f64> {
    ExponentPair::new(p, q).unwrap()
}

/// Ground-state values on the diagonal, frozen from the library's diagonal
/// bisection at `rel_tol = 1e-12`.
pub const DIAGONAL_A_STAR: [(u32, f64, f64); 3] =
    [(3, 3.0, 4.898979485566), (4, 2.0, 24.885917801163), (5, 2.0, 120.000000000029)];

/// Ground state of `(N, p, q) = (3, 2, 4)`, frozen from the 2-D solver at
/// `rel_tol = 1e-11`.
pub const ASYMMETRIC_FIXTURE: (f64, f64) = (3.499788782055, 7.091487942208);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RefOutcome {
    /// First zero of `u`.
    Crossed(f64),
    /// `|u|` exceeded the threshold.
    Blowup(f64),
    /// Neither by the end time; final `(t, u, u')`.
    Running(f64, f64, f64),
}

fn sig(x: f64, p: f64) -> f64 {
    x.abs().powf(p - 1.0) * x
}

fn deriv(t: f64, y: [f64; 2], m: f64, p: f64) -> [f64; 2] {
    [y[1], -m / t.tanh() * y[1] - sig(y[0], p)]
}

/// RK4 with step `h` from the series start at `t = h` up to `t_end`;
/// `visit(t, u, u')` sees every node.
pub fn rk4_diagonal(
    a: f64,
    n: u32,
    p: f64,
    h: f64,
    t_end: f64,
    blowup: f64,
    mut visit: impl FnMut(f64, f64, f64),
) -> RefOutcome {
    let m = (n - 1) as f64;
    let nn = n as f64;
    let mut t = h;
    let mut y = [a - sig(a, p) * h * h / (2.0 * nn), -sig(a, p) * h / nn];
    visit(0.0, a, 0.0);
    visit(t, y[0], y[1]);
    while t < t_end {
        let k1 = deriv(t, y, m, p);
        let y2 = [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]];
        let k2 = deriv(t + 0.5 * h, y2, m, p);
        let y3 = [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]];
        let k3 = deriv(t + 0.5 * h, y3, m, p);
        let y4 = [y[0] + h * k3[0], y[1] + h * k3[1]];
        let k4 = deriv(t + h, y4, m, p);
        let next = [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        if next[0] <= 0.0 {
            // cubic Hermite through both nodes, root by bisection
            let (u0, d0, u1, d1) = (y[0], y[1], next[0], next[1]);
            let herm = |s: f64| {
                let (s2, s3) = (s * s, s * s * s);
                (2.0 * s3 - 3.0 * s2 + 1.0) * u0
                    + (s3 - 2.0 * s2 + s) * h * d0
                    + (-2.0 * s3 + 3.0 * s2) * u1
                    + (s3 - s2) * h * d1
            };
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if herm(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return RefOutcome::Crossed(t + 0.5 * (lo + hi) * h);
        }
        y = next;
        t += h;
        visit(t, y[0], y[1]);
        if y[0].abs() > blowup || y[1].abs() > blowup {
            return RefOutcome::Blowup(t);
        }
    }
    RefOutcome::Running(t, y[0], y[1])
}

/// Whether the diagonal run from `a` reaches zero before `t_end`.
pub fn overshoots(a: f64, n: u32, p: f64, h: f64, t_end: f64) -> bool {
    !matches!(rk4_diagonal(a, n, p, h, t_end, 1e6, |_, _, _| ()), RefOutcome::Running(..))
}

/// Diagonal ground state by bisection on the reference integrator: runs
/// that stay positive up to `t_end` but end with `u' > 0` undershoot.
pub fn reference_a_star(n: u32, p: f64, lo: f64, hi: f64, h: f64, t_end: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    assert!(!overshoots(lo, n, p, h, t_end) && overshoots(hi, n, p, h, t_end));
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if overshoots(mid, n, p, h, t_end) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
