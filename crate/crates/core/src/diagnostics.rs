//! Numerical checks of the qualitative properties of a computed radial
//! solution: monotonicity, the energy `J` and its dissipation, the far-field
//! decay rate, the integral identities and the action, and the exponential
//! sandwich of `u + v` by the characteristic comparison functions.
//!
//! All pass/fail thresholds scale with the integrator tolerances recorded in
//! the trajectory, so the suite tightens together with the integration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{sphere_area, tail_integral, weight_k, SpaceDim};
use crate::ode::{ExponentPair, RadialState, Trajectory};
use crate::params::{characteristic_roots, CharacteristicRoots};
use crate::scalar::{odd_pow, Scalar};

/// Allowed relative deviation of a fitted decay slope from `-2(N-1)`.
pub const DECAY_SLOPE_TOLERANCE: f64 = 0.05;
/// Largest and smallest width of the decay fit window.
pub const DECAY_WINDOW_MAX: f64 = 10.0;
pub const DECAY_WINDOW_MIN: f64 = 5.0;
/// A trajectory counts as decayed once `max(|u|, |v|)` has dropped by this
/// factor relative to its start.
pub const DECAYED_FACTOR: f64 = 1e-6;
/// Fractions of `(N-1)^2 / 4` at which the tail sandwich is checked.
pub const TAIL_EPS_FRACTIONS: [f64; 3] = [0.1, 0.25, 0.5];

/// Result of [`check_monotone`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport<T> {
    pub passed: bool,
    /// `10 * abs_tol` of the trajectory.
    pub slack: T,
    /// Index and time of the first node with `u' >= slack` or `v' >= slack`.
    pub first_violation: Option<(usize, T)>,
    /// Largest `max(u', v')` over the checked nodes.
    pub max_derivative: T,
    pub nodes_checked: usize,
}

/// Result of [`check_energy_dissipation`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport<T> {
    /// `J` at every trajectory node.
    pub j_samples: Vec<T>,
    /// Largest increase of `J` between consecutive nodes (zero if none).
    pub max_increase: T,
    /// `100 * rel_tol * |J(t0)|`.
    pub increase_bound: T,
    /// Per interval: `|dJ + integral of 2 (N-1) coth(t) u'v'| / |J(t0)|`;
    /// zero for intervals that are not a single integrator step.
    pub interval_residuals: Vec<T>,
    /// Largest entry of `interval_residuals`.
    pub dissipation_residual: T,
    pub passed: bool,
}

/// Result of [`fit_decay`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport<T> {
    pub slope_u2: T,
    pub slope_v2: T,
    pub slope_du2: T,
    pub slope_dv2: T,
    /// `-2(N-1)`.
    pub target: T,
    pub window: (T, T),
    /// Largest `|slope / target - 1|` of the four slopes.
    pub max_rel_dev: T,
    /// Nodes in the window where some fitted quantity is exactly zero; they
    /// are left out of that quantity's fit.
    pub excluded_nodes: Vec<usize>,
    pub nodes_in_window: usize,
    pub passed: bool,
}

/// Result of [`check_identities`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport<T> {
    /// `omega_(N-1) * integral of k u' v'`.
    pub a: T,
    /// `omega_(N-1) * integral of k |u|^(q+1)`.
    pub b: T,
    /// `omega_(N-1) * integral of k |v|^(p+1)`.
    pub c: T,
    /// `|A - B|, |B - C|, |A - C|` over `max(A, B, C)`.
    pub rel_residuals: [T; 3],
    /// `(1/2 - 1/(p+1)) C + (1/2 - 1/(q+1)) B`.
    pub action: T,
    /// Quadrature of `u'v' - v_+^(p+1)/(p+1) - u_+^(q+1)/(q+1)` itself.
    pub action_direct: T,
    /// `|action - action_direct| / |action|`.
    pub action_mismatch: T,
    /// Tail contributions beyond the last node included in `a`, `b`, `c`.
    pub tail: [T; 3],
    /// Threshold applied to the residuals and to the action mismatch.
    pub tolerance: T,
    pub passed: bool,
}

/// Result of [`characteristic_tail_bound`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailBoundReport<T> {
    pub roots: CharacteristicRoots<T>,
    /// First node from which `coth t <= 1 + eps`, `v^(p-1) <= eps` and
    /// `u^(q-1) <= eps` hold at every later node; `None` if never.
    pub t_eps: Option<T>,
    /// `false` when `t_eps` is not reached; the bound then says nothing.
    pub applicable: bool,
    /// Smallest `log(u + v) - log(lower bound)` beyond `t_eps`.
    pub lower_margin: T,
    /// Smallest `log(upper bound) - log(u + v)` beyond `t_eps`.
    pub upper_margin: T,
    /// Log-space slack allowed for integration error.
    pub slack: T,
    pub nodes_checked: usize,
    pub first_violation: Option<T>,
    pub passed: bool,
}

/// All checks of one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsBundle<T> {
    pub monotone: MonotoneReport<T>,
    pub energy: EnergyReport<T>,
    pub decay: DecayReport<T>,
    pub identities: IdentityReport<T>,
    pub tail_bounds: Vec<TailBoundReport<T>>,
}

impl<T: Scalar> DiagnosticsBundle<T> {
    pub fn passed(&self) -> bool {
        self.monotone.passed
            && self.energy.passed
            && self.decay.passed
            && self.identities.passed
            && self.tail_bounds.iter().all(|r| r.passed)
    }

    /// Names of the failed checks.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.monotone.passed {
            out.push("monotone");
        }
        if !self.energy.passed {
            out.push("energy");
        }
        if !self.decay.passed {
            out.push("decay");
        }
        if !self.identities.passed {
            out.push("identities");
        }
        if !self.tail_bounds.iter().all(|r| r.passed) {
            out.push("tail_bound");
        }
        out
    }
}

/// Runs every check; the tail sandwich at the fractions
/// [`TAIL_EPS_FRACTIONS`] of `(N-1)^2 / 4`.
pub fn diagnose<T: Scalar>(traj: &Trajectory<T>, n: SpaceDim, pq: &ExponentPair<T>) -> Result<DiagnosticsBundle<T>> {
    let m = n.damping::<T>();
    let tail_bounds = TAIL_EPS_FRACTIONS
        .iter()
        .map(|&f| characteristic_tail_bound(traj, n, pq, T::c(f) * m * m / T::c(4.0)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiagnosticsBundle {
        monotone: check_monotone(traj)?,
        energy: check_energy_dissipation(traj, n, pq)?,
        decay: fit_decay(traj, n)?,
        identities: check_identities(traj, n, pq)?,
        tail_bounds,
    })
}

/// `u' < 10 abs_tol` and `v' < 10 abs_tol` at every node after the first.
pub fn check_monotone<T: Scalar>(traj: &Trajectory<T>) -> Result<MonotoneReport<T>> {
    if traj.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "monotonicity needs nodes beyond the start, got {} node(s)",
            traj.len()
        )));
    }
    let slack = T::c(10.0) * traj.abs_tol();
    let states = &traj.states()[1..];
    let first_violation = states.iter().position(|s| !(s.du < slack && s.dv < slack)).map(|i| (i + 1, states[i].t));
    let max_derivative = states.iter().fold(T::neg_infinity(), |acc, s| acc.max(s.du).max(s.dv));
    Ok(MonotoneReport {
        passed: first_violation.is_none(),
        slack,
        first_violation,
        max_derivative,
        nodes_checked: states.len(),
    })
}

/// `J = u'v' + |v|^(p+1)/(p+1) + |u|^(q+1)/(q+1)`.
pub fn energy_j<T: Scalar>(s: &RadialState<T>, pq: &ExponentPair<T>) -> T {
    let (p1, q1) = (pq.p() + T::one(), pq.q() + T::one());
    s.du * s.dv + pow_abs(s.v, p1) / p1 + pow_abs(s.u, q1) / q1
}

fn pow_abs<T: Scalar>(x: T, r: T) -> T {
    if x == T::zero() {
        T::zero()
    } else {
        x.abs().powf(r)
    }
}

/// `(u, u', u'', u''')` and `(v, v', v'', v''')` at a node, the higher
/// derivatives taken from the equations. At `t = 0` the profiles are even,
/// with `u''(0) = -|v|^(p-1) v / N`.
fn state_jet<T: Scalar>(s: &RadialState<T>, n: SpaceDim, pq: &ExponentPair<T>) -> ([T; 4], [T; 4]) {
    if s.t == T::zero() {
        let nn = n.as_scalar::<T>();
        return (
            [s.u, T::zero(), -odd_pow(s.v, pq.p()) / nn, T::zero()],
            [s.v, T::zero(), -odd_pow(s.u, pq.q()) / nn, T::zero()],
        );
    }
    let m = n.damping::<T>();
    let sh = s.t.sinh();
    let c = m / s.t.tanh();
    let dc = -m / (sh * sh);
    let ddu = -c * s.du - odd_pow(s.v, pq.p());
    let ddv = -c * s.dv - odd_pow(s.u, pq.q());
    let dddu = -dc * s.du - c * ddu - pq.p() * pow_abs(s.v, pq.p() - T::one()) * s.dv;
    let dddv = -dc * s.dv - c * ddv - pq.q() * pow_abs(s.u, pq.q() - T::one()) * s.du;
    ([s.u, s.du, ddu, dddu], [s.v, s.dv, ddv, dddv])
}

/// Dissipation rate `g = 2 (N-1) coth(t) u'v'` (so that `J' = -g`) and its
/// first two time derivatives along the flow.
fn dissipation_jet<T: Scalar>(s: &RadialState<T>, n: SpaceDim, pq: &ExponentPair<T>) -> [T; 3] {
    let m = n.damping::<T>();
    let two = T::c(2.0);
    let coth = T::one() / s.t.tanh();
    let sh = s.t.sinh();
    let c = m * coth;
    let dc = -m / (sh * sh);
    let ddc = -two * coth * dc;
    let (ju, jv) = state_jet(s, n, pq);
    let w = ju[1] * jv[1];
    let dw = ju[2] * jv[1] + ju[1] * jv[2];
    let ddw = ju[3] * jv[1] + two * ju[2] * jv[2] + ju[1] * jv[3];
    [two * c * w, two * (dc * w + c * dw), two * (ddc * w + two * dc * dw + c * ddw)]
}

/// Quintic Hermite interpolant on `[0, h]` from `(f, f', f'')` at both ends,
/// evaluated at `s = x / h`.
fn hermite5_eval<T: Scalar>(h: T, s: T, f0: &[T], f1: &[T]) -> T {
    let c = T::c;
    let (s2, s3) = (s * s, s * s * s);
    let (s4, s5) = (s3 * s, s3 * s2);
    let h0 = T::one() - c(10.0) * s3 + c(15.0) * s4 - c(6.0) * s5;
    let h1 = s - c(6.0) * s3 + c(8.0) * s4 - c(3.0) * s5;
    let h2 = (s2 - c(3.0) * s3 + c(3.0) * s4 - s5) / c(2.0);
    let g0 = c(10.0) * s3 - c(15.0) * s4 + c(6.0) * s5;
    let g1 = -c(4.0) * s3 + c(7.0) * s4 - c(3.0) * s5;
    let g2 = (s3 - c(2.0) * s4 + s5) / c(2.0);
    f0[0] * h0 + h * f0[1] * h1 + h * h * f0[2] * h2 + f1[0] * g0 + h * f1[1] * g1 + h * h * f1[2] * g2
}

/// `omega_(N-1) * integral of k(t) f(state)` over the span of `nodes`
/// (`nodes[0]` may sit at the origin), for `K` integrands at once.
///
/// Between nodes the profiles and their derivatives are reconstructed from
/// quintic Hermite interpolants of `(u, u', u'')` and `(u', u'', u''')`, and
/// each interval is integrated by three-point Gauss–Legendre, so the rule is
/// of sixth order in the node spacing.
fn interpolated_integrals<T: Scalar, const K: usize>(
    nodes: &[RadialState<T>],
    n: SpaceDim,
    pq: &ExponentPair<T>,
    f: impl Fn(&RadialState<T>) -> [T; K],
) -> Result<[T; K]> {
    if nodes.len() < 2 {
        return Err(Error::InvalidInput(format!("integration needs at least 2 nodes, got {}", nodes.len())));
    }
    let jets: Vec<([T; 4], [T; 4])> = nodes.iter().map(|s| state_jet(s, n, pq)).collect();
    let half = T::c(0.5);
    let r = T::c(0.6).sqrt() * half;
    let gauss = [(half - r, T::c(5.0 / 18.0)), (half, T::c(8.0 / 18.0)), (half + r, T::c(5.0 / 18.0))];
    let mut acc = [T::zero(); K];
    for i in 1..nodes.len() {
        let (t0, t1) = (nodes[i - 1].t, nodes[i].t);
        let h = t1 - t0;
        let ((u0, v0), (u1, v1)) = (&jets[i - 1], &jets[i]);
        for &(x, w) in &gauss {
            let s = RadialState::new(
                t0 + x * h,
                hermite5_eval(h, x, &u0[..3], &u1[..3]),
                hermite5_eval(h, x, &u0[1..], &u1[1..]),
                hermite5_eval(h, x, &v0[..3], &v1[..3]),
                hermite5_eval(h, x, &v0[1..], &v1[1..]),
            );
            let k = weight_k(s.t, n)?;
            let vals = f(&s);
            for j in 0..K {
                acc[j] = acc[j] + w * h * k * vals[j];
            }
        }
    }
    let area = sphere_area::<T>(n);
    Ok(acc.map(|x| area * x))
}

/// Two-point Hermite rule using values, first and second derivatives at both
/// ends; exact for quintics.
fn hermite5<T: Scalar>(h: T, f0: &[T; 3], f1: &[T; 3]) -> T {
    h / T::c(2.0) * (f0[0] + f1[0]) + h * h / T::c(10.0) * (f0[1] - f1[1]) + h * h * h / T::c(120.0) * (f0[2] + f1[2])
}

/// Samples `J` along the trajectory and compares each step's change of `J`
/// with the integrated dissipation rate.
///
/// Passes when no increase of `J` between nodes exceeds
/// `100 * rel_tol * |J(t0)|`.
pub fn check_energy_dissipation<T: Scalar>(
    traj: &Trajectory<T>,
    n: SpaceDim,
    pq: &ExponentPair<T>,
) -> Result<EnergyReport<T>> {
    if traj.is_empty() {
        return Err(Error::InvalidInput("energy check on an empty trajectory".into()));
    }
    if let Some(s) = traj.states().iter().find(|s| !(s.t > T::zero())) {
        return Err(Error::InvalidInput(format!("energy check needs t > 0, found node at t = {}", s.t)));
    }
    let states = traj.states();
    let j_samples: Vec<T> = states.iter().map(|s| energy_j(s, pq)).collect();
    let scale = j_samples[0].abs().max(T::min_positive_value());
    let max_increase = j_samples.windows(2).fold(T::zero(), |acc, w| acc.max(w[1] - w[0]));
    let jets: Vec<[T; 3]> = states.iter().map(|s| dissipation_jet(s, n, pq)).collect();
    let interval_residuals: Vec<T> = (1..states.len())
        .map(|i| {
            if !traj.is_step(i) {
                return T::zero();
            }
            let h = states[i].t - states[i - 1].t;
            let loss = hermite5(h, &jets[i - 1], &jets[i]);
            ((j_samples[i] - j_samples[i - 1]) + loss).abs() / scale
        })
        .collect();
    let dissipation_residual = interval_residuals.iter().fold(T::zero(), |acc, &r| acc.max(r));
    let increase_bound = T::c(100.0) * traj.rel_tol() * j_samples[0].abs();
    Ok(EnergyReport {
        passed: max_increase <= increase_bound,
        j_samples,
        max_increase,
        increase_bound,
        interval_residuals,
        dissipation_residual,
    })
}

fn require_decayed<T: Scalar>(traj: &Trajectory<T>, what: &str) -> Result<()> {
    let (first, last) = match (traj.first(), traj.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::InvalidInput(format!("{what} on an empty trajectory"))),
    };
    let start = first.u.abs().max(first.v.abs());
    let end = last.u.abs().max(last.v.abs());
    if !(end <= T::c(DECAYED_FACTOR) * start) {
        return Err(Error::InvalidInput(format!(
            "{what} needs a decayed trajectory: max(|u|, |v|) = {end} at t = {} against {start} at the start",
            last.t
        )));
    }
    Ok(())
}

/// Least-squares slope of `y` against `x`.
fn ls_slope<T: Scalar>(x: &[T], y: &[T]) -> T {
    let len = T::from_usize(x.len()).expect("count representable");
    let mx = x.iter().fold(T::zero(), |a, &b| a + b) / len;
    let my = y.iter().fold(T::zero(), |a, &b| a + b) / len;
    let (sxy, sxx) = x.iter().zip(y).fold((T::zero(), T::zero()), |(sxy, sxx), (&xi, &yi)| {
        let dx = xi - mx;
        (sxy + dx * (yi - my), sxx + dx * dx)
    });
    sxy / sxx
}

/// Fits the slopes of `log u^2`, `log v^2`, `log u'^2`, `log v'^2` against
/// `t` over the last `W = min(10, span / 3)` units of the trajectory.
///
/// Passes when all four slopes are within 5% of `-2(N-1)`.
pub fn fit_decay<T: Scalar>(traj: &Trajectory<T>, n: SpaceDim) -> Result<DecayReport<T>> {
    require_decayed(traj, "decay fit")?;
    let states = traj.states();
    let t_hi = states[states.len() - 1].t;
    let span = t_hi - states[0].t;
    let width = T::c(DECAY_WINDOW_MAX).min(span / T::c(3.0));
    if width < T::c(DECAY_WINDOW_MIN) {
        return Err(Error::Window { width: width.f64(), required: DECAY_WINDOW_MIN });
    }
    let t_lo = t_hi - width;
    let first = states.partition_point(|s| s.t < t_lo);
    let window = &states[first..];
    let mut excluded_nodes = Vec::new();
    for (i, s) in window.iter().enumerate() {
        if s.u == T::zero() || s.v == T::zero() || s.du == T::zero() || s.dv == T::zero() {
            excluded_nodes.push(first + i);
        }
    }
    let slope = |get: fn(&RadialState<T>) -> T, name: &str| -> Result<T> {
        let (x, y): (Vec<T>, Vec<T>) =
            window.iter().filter(|s| get(s) != T::zero()).map(|s| (s.t, (get(s) * get(s)).ln())).unzip();
        if x.len() < 3 {
            return Err(Error::InvalidInput(format!(
                "decay fit of {name} has {} usable nodes in [{t_lo}, {t_hi}]",
                x.len()
            )));
        }
        Ok(ls_slope(&x, &y))
    };
    let slope_u2 = slope(|s| s.u, "u")?;
    let slope_v2 = slope(|s| s.v, "v")?;
    let slope_du2 = slope(|s| s.du, "u'")?;
    let slope_dv2 = slope(|s| s.dv, "v'")?;
    let target = -T::c(2.0) * n.damping::<T>();
    let max_rel_dev = [slope_u2, slope_v2, slope_du2, slope_dv2]
        .iter()
        .fold(T::zero(), |acc, &s| acc.max((s / target - T::one()).abs()));
    Ok(DecayReport {
        slope_u2,
        slope_v2,
        slope_du2,
        slope_dv2,
        target,
        window: (t_lo, t_hi),
        passed: max_rel_dev <= T::c(DECAY_SLOPE_TOLERANCE) && max_rel_dev.is_finite(),
        max_rel_dev,
        excluded_nodes,
        nodes_in_window: window.len(),
    })
}

/// Threshold of the identity residuals and the action mismatch: `1e-3` at
/// the default tolerance `1e-10`, proportionally smaller below it.
pub fn identity_tolerance<T: Scalar>(rel_tol: T) -> T {
    T::c(1e-3).min(T::c(1e7) * rel_tol)
}

/// Weighted integrals `A = ∫k u'v'`, `B = ∫k |u|^(q+1)`, `C = ∫k |v|^(p+1)`
/// (times the sphere area) over the trajectory extended to the origin, with
/// the tail beyond the last node closed using the fitted decay slopes.
///
/// For a solution the three coincide, and the action follows either from
/// its definition or as `(1/2 - 1/(p+1)) C + (1/2 - 1/(q+1)) B`.
pub fn check_identities<T: Scalar>(
    traj: &Trajectory<T>,
    n: SpaceDim,
    pq: &ExponentPair<T>,
) -> Result<IdentityReport<T>> {
    require_decayed(traj, "integral identities")?;
    let states = traj.states();
    let first = states[0];
    let last = states[states.len() - 1];
    // the series start u = a + alpha t^2 + ... gives u(0) = u - t u'/2 + O(t^4)
    let half = T::c(0.5);
    let origin = RadialState::new(
        T::zero(),
        first.u - half * first.t * first.du,
        T::zero(),
        first.v - half * first.t * first.dv,
        T::zero(),
    );
    let mut nodes = Vec::with_capacity(states.len() + 1);
    if first.t > T::zero() {
        nodes.push(origin);
    }
    nodes.extend_from_slice(states);
    let (p1, q1) = (pq.p() + T::one(), pq.q() + T::one());
    let [a_body, b_body, c_body, i_body] = interpolated_integrals(&nodes, n, pq, |s| {
        let (up, vp) = (pow_abs(s.u, q1), pow_abs(s.v, p1));
        let vp_pos = if s.v > T::zero() { vp } else { T::zero() };
        let up_pos = if s.u > T::zero() { up } else { T::zero() };
        [s.du * s.dv, up, vp, s.du * s.dv - vp_pos / p1 - up_pos / q1]
    })?;

    let ends = [last.du * last.dv, pow_abs(last.u, q1), pow_abs(last.v, p1)];
    let tail = if ends.iter().all(|&e| e == T::zero()) {
        [T::zero(); 3]
    } else {
        let fit = fit_decay(traj, n)?;
        let half = T::c(0.5);
        let rates = [half * (fit.slope_du2 + fit.slope_dv2), half * q1 * fit.slope_u2, half * p1 * fit.slope_v2];
        let mut tail = [T::zero(); 3];
        for k in 0..3 {
            tail[k] = tail_integral(last.t, ends[k], rates[k], n)?;
        }
        tail
    };
    let (a, b, c) = (a_body + tail[0], b_body + tail[1], c_body + tail[2]);
    let i_tail = tail[0] - pos_part(tail[2], last.v) / p1 - pos_part(tail[1], last.u) / q1;
    let action_direct = i_body + i_tail;
    let action = (half - T::one() / p1) * c + (half - T::one() / q1) * b;

    let top = a.max(b).max(c);
    let rel = |x: T, y: T| if top > T::zero() { (x - y).abs() / top } else { T::zero() };
    let rel_residuals = [rel(a, b), rel(b, c), rel(a, c)];
    let action_mismatch = if action != T::zero() {
        (action - action_direct).abs() / action.abs()
    } else {
        (action - action_direct).abs()
    };
    let tolerance = identity_tolerance(traj.rel_tol());
    let passed = rel_residuals.iter().all(|&r| r <= tolerance) && action_mismatch <= tolerance;
    Ok(IdentityReport { a, b, c, rel_residuals, action, action_direct, action_mismatch, tail, tolerance, passed })
}

/// The tail integral of a positive-part power when the last value has sign
/// `x`.
fn pos_part<T: Scalar>(tail: T, x: T) -> T {
    if x > T::zero() {
        tail
    } else {
        T::zero()
    }
}

/// Checks that beyond `t_eps`
///
/// ```text
/// (u+v)(t_eps) e^(mu-(eps) (t - t_eps)) <= (u+v)(t) <= (u+v)(t_eps) e^(nu-(eps) (t - t_eps))
/// ```
///
/// where `t_eps` is the first node after which `coth t <= 1 + eps`,
/// `v^(p-1) <= eps` and `u^(q-1) <= eps` hold throughout. The comparison is
/// made in log space with a slack of `1000 * rel_tol`.
pub fn characteristic_tail_bound<T: Scalar>(
    traj: &Trajectory<T>,
    n: SpaceDim,
    pq: &ExponentPair<T>,
    eps: T,
) -> Result<TailBoundReport<T>> {
    if !(eps > T::zero()) {
        return Err(Error::InvalidInput(format!("eps = {eps} must be positive")));
    }
    let roots = characteristic_roots(n, eps)?;
    if traj.is_empty() {
        return Err(Error::InvalidInput("tail bound on an empty trajectory".into()));
    }
    let states = traj.states();
    let small = |s: &RadialState<T>| {
        s.t > T::zero()
            && T::one() / s.t.tanh() <= T::one() + eps
            && s.u > T::zero()
            && s.v > T::zero()
            && s.v.powf(pq.p() - T::one()) <= eps
            && s.u.powf(pq.q() - T::one()) <= eps
    };
    // first index of the trailing run on which all three conditions hold
    let start = states.iter().rposition(|s| !small(s)).map_or(0, |i| i + 1);
    let slack = T::c(1000.0) * traj.rel_tol();
    if start + 1 >= states.len() {
        return Ok(TailBoundReport {
            roots,
            t_eps: states.get(start).map(|s| s.t),
            applicable: false,
            lower_margin: T::infinity(),
            upper_margin: T::infinity(),
            slack,
            nodes_checked: 0,
            first_violation: None,
            passed: false,
        });
    }
    let anchor = states[start];
    let log0 = (anchor.u + anchor.v).ln();
    let mut lower_margin = T::infinity();
    let mut upper_margin = T::infinity();
    let mut first_violation = None;
    for s in &states[start + 1..] {
        let dt = s.t - anchor.t;
        let log_sum = (s.u + s.v).ln();
        let lo = log_sum - (log0 + roots.mu_minus * dt);
        let hi = (log0 + roots.nu_minus * dt) - log_sum;
        lower_margin = lower_margin.min(lo);
        upper_margin = upper_margin.min(hi);
        if first_violation.is_none() && (lo < -slack || hi < -slack) {
            first_violation = Some(s.t);
        }
    }
    Ok(TailBoundReport {
        roots,
        t_eps: Some(anchor.t),
        applicable: true,
        lower_margin,
        upper_margin,
        slack,
        nodes_checked: states.len() - start - 1,
        first_violation,
        passed: first_violation.is_none(),
    })
}
