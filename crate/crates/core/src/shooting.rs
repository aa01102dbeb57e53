//! Shooting for positive decaying radial solutions.
//!
//! Initial data `(a, b) = (u(0), v(0))` split into three classes by the
//! first event of [`integrate`]: `v` reaches zero first (too much `a`), `u`
//! reaches zero first or the solution blows up (too much `b`), or neither
//! (decay, or slow positive decay reported as undetermined). The quiet class
//! forms a wedge whose apex is the ground state, where the profile decays at
//! the fast rate `exp(-(N-1) t)`.
//!
//! [`find_ground_state`] locates the apex by nested bisection on a
//! classification grid, polishes it with a damped Newton iteration on the
//! asymptotic boundary condition `u' + (N-1) u = v' + (N-1) v = 0` (in the
//! sharper form that uses the exact decaying linear mode), and
//! continues the profile into the far field along the decaying solution of
//! the linearised problem, integrated backwards and matched to the forward
//! profile.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SpaceDim;
use crate::ode::dop853::{self, DriveFailure, Flow, StepData, Tolerance};
use crate::ode::{
    field, integrate, replay_on_mesh, run, ExponentPair, IntegratorControls, RadialState, ShootingOutcome, Stop,
    Trajectory,
};
use crate::params::classify_exponents;
use crate::scalar::Scalar;

/// Outcome of the initial-value run for `(a, b)`, without the trajectory.
pub fn classify_outcome<T: Scalar>(
    a: T,
    b: T,
    n: SpaceDim,
    pq: &ExponentPair<T>,
    ctl: &IntegratorControls<T>,
) -> Result<ShootingOutcome<T>> {
    Ok(integrate(a, b, n, pq, ctl)?.1)
}

/// Symmetric ground state `u = v` found by bisection along the diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalGroundState<T> {
    /// Midpoint of the final bracket.
    pub a: T,
    /// Final bracket end whose run does not overshoot.
    pub a_quiet: T,
    /// Final bracket end whose run overshoots (crossing or blow-up).
    pub a_overshoot: T,
    pub quiet_outcome: ShootingOutcome<T>,
    pub overshoot_outcome: ShootingOutcome<T>,
    /// Run from `a_quiet`.
    pub trajectory: Trajectory<T>,
}

/// Relative width at which the diagonal bisection stops.
pub const DIAGONAL_REL_WIDTH: f64 = 1e-12;

/// Bisection for the symmetric ground state `a = b` when `p = q`.
///
/// The classification boundary between overshooting and non-overshooting
/// data is located to a relative width of `1e-12`, with the decay exit
/// disabled so that every run goes on to its first crossing or `t_max`. The
/// non-overshooting end, rerun with the given controls, must then decay with
/// positive decreasing profiles, otherwise a structure error is returned.
pub fn bisect_on_diagonal<T: Scalar>(
    n: SpaceDim,
    pq: &ExponentPair<T>,
    ctl: &IntegratorControls<T>,
    a_lo: T,
    a_hi: T,
) -> Result<DiagonalGroundState<T>> {
    if !pq.is_symmetric() {
        return Err(Error::Precondition(format!("diagonal reduction needs p = q, got p = {}, q = {}", pq.p(), pq.q())));
    }
    if !(a_lo > T::zero() && a_lo < a_hi && a_hi.is_finite()) {
        return Err(Error::InvalidInput(format!("bracket [{a_lo}, {a_hi}] must satisfy 0 < a_lo < a_hi")));
    }
    ctl.validate()?;
    // An early decay exit would hide slow crossings that start below the
    // decay margin and bias the boundary; classify on the full range instead.
    let sharp = IntegratorControls { decay_margin: T::zero(), ..*ctl };
    let classify = |a: T| classify_outcome(a, a, n, pq, &sharp);
    let (out_lo, out_hi) = (classify(a_lo)?, classify(a_hi)?);
    if out_lo.overshoots() == out_hi.overshoots() {
        return Err(Error::Bracket(format!(
            "both ends of [{a_lo}, {a_hi}] give the same class ({} / {})",
            out_lo.label(),
            out_hi.label()
        )));
    }
    let (mut quiet, mut over, mut quiet_out, mut over_out) =
        if out_lo.overshoots() { (a_hi, a_lo, out_hi, out_lo) } else { (a_lo, a_hi, out_lo, out_hi) };
    let width = T::c(DIAGONAL_REL_WIDTH);
    while (over - quiet).abs() > width * quiet.max(over) {
        let mid = quiet + (over - quiet) / T::c(2.0);
        if mid == quiet || mid == over {
            break;
        }
        let out = classify(mid)?;
        if out.overshoots() {
            over = mid;
            over_out = out;
        } else {
            quiet = mid;
            quiet_out = out;
        }
    }
    let (trajectory, outcome) = integrate(quiet, quiet, n, pq, ctl)?;
    if !outcome.is_decay() || !is_positive_decreasing(&trajectory) {
        return Err(Error::Structure(format!(
            "no decaying positive profile at the classification boundary a = {quiet} ({})",
            outcome.label()
        )));
    }
    Ok(DiagonalGroundState {
        a: quiet + (over - quiet) / T::c(2.0),
        a_quiet: quiet,
        a_overshoot: over,
        quiet_outcome: quiet_out,
        overshoot_outcome: over_out,
        trajectory,
    })
}

fn is_positive_decreasing<T: Scalar>(traj: &Trajectory<T>) -> bool {
    let t0 = traj.first().map_or(T::zero(), |s| s.t);
    traj.states().iter().all(|s| s.u > T::zero() && s.v > T::zero())
        && traj.states().iter().filter(|s| s.t > t0).all(|s| s.du < T::zero() && s.dv < T::zero())
}

/// Square box `[lo, hi]^2` of initial data scanned on a log-spaced grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedRegion<T> {
    pub lo: T,
    pub hi: T,
    /// Grid points per axis.
    pub points: usize,
    /// How often the box may be widened by a decade when it holds no
    /// usable classification flip.
    pub max_expansions: usize,
}

impl<T: Scalar> Default for SeedRegion<T> {
    fn default() -> Self {
        SeedRegion { lo: T::c(1e-2), hi: T::c(1e2), points: 16, max_expansions: 6 }
    }
}

impl<T: Scalar> SeedRegion<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo > T::zero() && self.lo < self.hi && self.hi.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "seed region [{}, {}] must satisfy 0 < lo < hi",
                self.lo, self.hi
            )));
        }
        if self.points < 2 {
            return Err(Error::InvalidInput("seed grid needs at least 2 points per axis".into()));
        }
        Ok(())
    }

    fn axis(&self) -> Vec<T> {
        let (l, h) = (self.lo.ln(), self.hi.ln());
        let m = T::c((self.points - 1) as f64);
        (0..self.points).map(|i| (l + (h - l) * T::c(i as f64) / m).exp()).collect()
    }
}

/// First-event class used by the two-dimensional search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventClass {
    /// `v` reaches zero first.
    V,
    /// `u` reaches zero first, or blow-up.
    U,
    /// Decay or undetermined: no overshoot.
    Quiet,
}

impl EventClass {
    pub fn of<T: Scalar>(o: &ShootingOutcome<T>) -> Self {
        match o {
            ShootingOutcome::VCrossed { .. } => EventClass::V,
            ShootingOutcome::UCrossed { .. } | ShootingOutcome::Blowup { .. } => EventClass::U,
            ShootingOutcome::Decay { .. } | ShootingOutcome::Undetermined { .. } => EventClass::Quiet,
        }
    }
}

/// Two neighbouring grid points with different classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlipCell<T> {
    pub from: (T, T),
    pub to: (T, T),
    pub from_class: EventClass,
    pub to_class: EventClass,
}

/// Final brackets of the nested bisection: `a` between a row that meets the
/// quiet wedge and one that does not, and `b` between a `v`-crossing and a
/// `u`-crossing point on the latter row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingBracket<T> {
    pub a_lo: T,
    pub a_hi: T,
    pub b_lo: T,
    pub b_hi: T,
    pub b_lo_class: EventClass,
    pub b_hi_class: EventClass,
}

/// Tuning of [`find_ground_state_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions<T> {
    /// The boundary condition is first imposed at the first node where
    /// `max(|u|, |v|) <= residual_level * max(a, b)`.
    pub residual_level: T,
    /// The level is then lowered a hundredfold per stage down to this one;
    /// the far-field continuation starts there as well.
    pub final_residual_level: T,
    /// Convergence: `|R| <= newton_tol * (|u(T)| + |v(T)| + floor)`.
    pub newton_tol: T,
    /// Relative central-difference step of the Jacobian, taken along the
    /// scaled directions `(a, b)` and `(a, -b)`.
    pub fd_step: T,
    pub max_newton_iterations: usize,
    /// Relative width at which the bisection on `a` stops.
    pub a_rel_width: T,
    /// Relative width at which a bisection on `b` stops.
    pub b_rel_width: T,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        SolverOptions {
            residual_level: T::c(1e-4),
            final_residual_level: T::c(1e-6),
            newton_tol: T::c(1e-8),
            fd_step: T::c(1e-6),
            max_newton_iterations: 30,
            a_rel_width: T::c(1e-12),
            b_rel_width: T::c(1e-13),
        }
    }
}

/// A positive, decreasing, decaying radial solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundState<T> {
    pub a: T,
    pub b: T,
    /// Forward profile up to `match_point`, continued by the decaying far
    /// field solution up to the end of the trajectory.
    pub trajectory: Trajectory<T>,
    pub outcome: ShootingOutcome<T>,
    /// `|(u' - kappa u, v' - kappa v)|` at `residual_time`, with `kappa` the
    /// logarithmic derivative of the decaying linear mode (`-(N-1)` in the
    /// limit).
    pub residual: T,
    /// The convergence bound the residual was held to.
    pub residual_bound: T,
    pub residual_time: T,
    /// Newton converged; `false` means the bisection candidate is returned.
    pub polished: bool,
    pub newton_iterations: usize,
    pub match_point: T,
    pub bracket: ShootingBracket<T>,
    pub flip_cells: Vec<FlipCell<T>>,
    /// The seed box actually scanned (after any widening).
    pub seed: SeedRegion<T>,
}

/// [`find_ground_state_with`] using default [`SolverOptions`].
pub fn find_ground_state<T: Scalar>(
    n: SpaceDim,
    pq: &ExponentPair<T>,
    ctl: &IntegratorControls<T>,
    seed: &SeedRegion<T>,
) -> Result<GroundState<T>> {
    find_ground_state_with(n, pq, ctl, seed, &SolverOptions::default())
}

/// Two-phase search for a ground state `(a, b)`.
///
/// Phase 1 scans the seed box, then bisects in `a` between a grid row that
/// meets the quiet wedge and one that passes directly from `v`-crossing to
/// `u`-crossing; each row is decided by bisection in `b`. Phase 2 polishes
/// the candidate with a damped Newton iteration on the asymptotic residual,
/// evaluated on the frozen step sequence of the candidate run.
pub fn find_ground_state_with<T: Scalar>(
    n: SpaceDim,
    pq: &ExponentPair<T>,
    ctl: &IntegratorControls<T>,
    seed: &SeedRegion<T>,
    opts: &SolverOptions<T>,
) -> Result<GroundState<T>> {
    let regime = classify_exponents(n, pq.p().f64(), pq.q().f64())?;
    if !regime.verdicts.existence_hypothesis {
        return Err(Error::Precondition(format!(
            "1/(p+1) + 1/(q+1) > (N-2)/N fails for N = {}, p = {}, q = {} (margin {:e})",
            n.get(),
            pq.p(),
            pq.q(),
            regime.hyperbola_margin
        )));
    }
    ctl.validate()?;
    seed.validate()?;
    let search = Search { n, pq: *pq, ctl: *ctl, opts: *opts };

    let (seed_used, rows, flip_cells) = search.scan(seed)?;
    let (bracket, candidate) = search.nested_bisection(&rows)?;
    let polish = search.polish_staged(candidate)?;
    let (a, b) = polish.x;
    let (trajectory, match_point) = search.continue_to_far_field(a, b)?;
    let t_end = trajectory.last().map_or(ctl.t_max, |s| s.t);
    Ok(GroundState {
        a,
        b,
        trajectory,
        outcome: ShootingOutcome::Decay { t_reached: t_end },
        residual: polish.residual,
        residual_bound: polish.bound,
        residual_time: polish.t,
        polished: polish.converged,
        newton_iterations: polish.iterations,
        match_point,
        bracket,
        flip_cells,
        seed: seed_used,
    })
}

/// Scanned grid row: `a` and the classes along increasing `b`.
#[derive(Debug, Clone)]
struct Row<T> {
    a: T,
    bs: Vec<T>,
    classes: Vec<EventClass>,
}

/// Seed box actually used, its classified rows and the flip cells found.
type Scan<T> = (SeedRegion<T>, Vec<Row<T>>, Vec<FlipCell<T>>);

/// How a row at fixed `a` passes from `v`-crossing to `u`-crossing.
#[derive(Debug, Clone, Copy)]
enum RowKind<T> {
    /// Through a quiet point.
    Quiet,
    /// Directly, at the boundary between `b_v` and `b_u`.
    Direct { b_v: T, b_u: T },
}

struct Polish<T> {
    x: (T, T),
    residual: T,
    bound: T,
    t: T,
    converged: bool,
    iterations: usize,
}

struct Search<T> {
    n: SpaceDim,
    pq: ExponentPair<T>,
    ctl: IntegratorControls<T>,
    opts: SolverOptions<T>,
}

impl<T: Scalar> Search<T> {
    fn class(&self, a: T, b: T) -> Result<EventClass> {
        Ok(EventClass::of(&classify_outcome(a, b, self.n, &self.pq, &self.ctl)?))
    }

    /// Classifies the seed grid, widening the box until it contains a row
    /// meeting the quiet wedge below a row that misses it.
    fn scan(&self, seed: &SeedRegion<T>) -> Result<Scan<T>> {
        let mut region = *seed;
        let ten = T::c(10.0);
        for _ in 0..=seed.max_expansions {
            let axis = region.axis();
            let cells: Vec<(usize, usize)> =
                (0..axis.len()).flat_map(|i| (0..axis.len()).map(move |j| (i, j))).collect();
            let classes: Vec<EventClass> =
                cells.par_iter().map(|&(i, j)| self.class(axis[i], axis[j])).collect::<Result<_>>()?;
            let m = axis.len();
            let rows: Vec<Row<T>> = (0..m)
                .map(|i| Row { a: axis[i], bs: axis.clone(), classes: classes[i * m..(i + 1) * m].to_vec() })
                .collect();
            let mut flips = Vec::new();
            for i in 0..m {
                for j in 0..m {
                    let c = classes[i * m + j];
                    for (i2, j2) in [(i + 1, j), (i, j + 1)] {
                        if i2 < m && j2 < m && classes[i2 * m + j2] != c {
                            flips.push(FlipCell {
                                from: (axis[i], axis[j]),
                                to: (axis[i2], axis[j2]),
                                from_class: c,
                                to_class: classes[i2 * m + j2],
                            });
                        }
                    }
                }
            }
            let kinds: Vec<Option<bool>> = rows.iter().map(|r| row_meets_wedge(r)).collect();
            let has_quiet_row = kinds.contains(&Some(true));
            let has_direct_row_above =
                kinds.iter().enumerate().any(|(i, k)| *k == Some(false) && kinds[..i].contains(&Some(true)));
            if has_quiet_row && has_direct_row_above {
                return Ok((region, rows, flips));
            }
            if !has_quiet_row {
                region.lo = region.lo / ten;
            }
            if !has_direct_row_above {
                region.hi = region.hi * ten;
            }
        }
        Err(Error::NoBracket(format!(
            "no classification flip isolating the quiet wedge in [{}, {}]^2 after {} widenings",
            region.lo, region.hi, seed.max_expansions
        )))
    }

    /// Decides the row at `a`, starting from `b_v` (v-crossing side) and `b_u`.
    fn decide_row(&self, a: T, b_v: T, b_u: T) -> Result<RowKind<T>> {
        let (mut lo, mut hi) = (b_v, b_u);
        loop {
            if (hi - lo).abs() <= self.opts.b_rel_width * lo.max(hi) {
                return Ok(RowKind::Direct { b_v: lo, b_u: hi });
            }
            let mid = lo + (hi - lo) / T::c(2.0);
            if mid == lo || mid == hi {
                return Ok(RowKind::Direct { b_v: lo, b_u: hi });
            }
            match self.class(a, mid)? {
                EventClass::V => lo = mid,
                EventClass::U => hi = mid,
                EventClass::Quiet => return Ok(RowKind::Quiet),
            }
        }
    }

    /// Moves `b_v` down and `b_u` up until they have the classes their names
    /// promise on the row at `a`.
    fn endpoints(&self, a: T, mut b_v: T, mut b_u: T) -> Result<(T, T)> {
        let two = T::c(2.0);
        let mut tries = 0;
        while self.class(a, b_v)? != EventClass::V {
            b_v = b_v / two;
            tries += 1;
            if tries > 60 {
                return Err(Error::Structure(format!("no v-crossing below b = {b_v} on the row a = {a}")));
            }
        }
        tries = 0;
        while self.class(a, b_u)? != EventClass::U {
            b_u = b_u * two;
            tries += 1;
            if tries > 60 {
                return Err(Error::Structure(format!("no u-crossing above b = {b_u} on the row a = {a}")));
            }
        }
        Ok((b_v, b_u))
    }

    fn nested_bisection(&self, rows: &[Row<T>]) -> Result<(ShootingBracket<T>, (T, T))> {
        // lowest row missing the wedge that lies above a row meeting it
        let kinds: Vec<Option<bool>> = rows.iter().map(row_meets_wedge).collect();
        let i_hi = (0..rows.len())
            .find(|&i| kinds[i] == Some(false) && kinds[..i].contains(&Some(true)))
            .expect("scan guarantees a bracket");
        let i_lo = (0..i_hi).rev().find(|&i| kinds[i] == Some(true)).expect("scan guarantees a bracket");
        let (bv_lo, bu_lo) = row_endpoints(&rows[i_lo]).expect("row has both crossings");
        let (bv_hi, bu_hi) = row_endpoints(&rows[i_hi]).expect("row has both crossings");
        let (b_v, b_u) = (bv_lo.min(bv_hi), bu_lo.max(bu_hi));

        let mut a_lo = rows[i_lo].a;
        let mut a_hi = rows[i_hi].a;
        let (bv, bu) = self.endpoints(a_hi, bv_hi, bu_hi)?;
        let mut edge = match self.decide_row(a_hi, bv, bu)? {
            RowKind::Direct { b_v, b_u } => (b_v, b_u),
            RowKind::Quiet => {
                // the grid missed a thin quiet interval; climb until a row misses it
                let mut found = None;
                let step = rows[i_hi].a / rows[i_hi - 1].a;
                for _ in 0..64 {
                    a_lo = a_hi;
                    a_hi = a_hi * step;
                    let (bv, bu) = self.endpoints(a_hi, b_v, b_u)?;
                    if let RowKind::Direct { b_v, b_u } = self.decide_row(a_hi, bv, bu)? {
                        found = Some((b_v, b_u));
                        break;
                    }
                }
                found.ok_or_else(|| Error::Structure("quiet wedge does not close off in a".into()))?
            }
        };
        while a_hi - a_lo > self.opts.a_rel_width * a_hi {
            let mid = a_lo + (a_hi - a_lo) / T::c(2.0);
            if mid == a_lo || mid == a_hi {
                break;
            }
            let (bv, bu) = self.endpoints(mid, b_v.min(edge.0), b_u.max(edge.1))?;
            match self.decide_row(mid, bv, bu)? {
                RowKind::Quiet => a_lo = mid,
                RowKind::Direct { b_v, b_u } => {
                    a_hi = mid;
                    edge = (b_v, b_u);
                }
            }
        }
        let bracket = ShootingBracket {
            a_lo,
            a_hi,
            b_lo: edge.0,
            b_hi: edge.1,
            b_lo_class: EventClass::V,
            b_hi_class: EventClass::U,
        };
        Ok((bracket, (a_hi, edge.0 + (edge.1 - edge.0) / T::c(2.0))))
    }

    /// Forward run from `(a, b)` until `max(|u|, |v|) <= level * max(a, b)`.
    fn forward(&self, a: T, b: T, level: T) -> Result<Trajectory<T>> {
        let (traj, stop) = run(a, b, self.n, &self.pq, &self.ctl, Some(level * a.max(b)))?;
        match stop {
            Stop::Level => Ok(traj),
            Stop::Event(o) => Err(Error::Structure(format!(
                "profile from (a, b) = ({a}, {b}) does not reach the residual level before {o}"
            ))),
        }
    }

    /// Newton polishing at successively lower residual levels. Each stage
    /// starts from the previous result; a stage that cannot be set up or does
    /// not converge ends the sequence with the last converged result.
    fn polish_staged(&self, x0: (T, T)) -> Result<Polish<T>> {
        let mut level = self.opts.residual_level;
        let last = self.opts.final_residual_level.min(level);
        let mut best = self.polish(x0, level)?;
        while best.converged && level > last {
            level = (level / T::c(100.0)).max(last);
            match self.polish(best.x, level) {
                Ok(p) if p.converged => best = Polish { iterations: best.iterations + p.iterations, ..p },
                _ => break,
            }
        }
        Ok(best)
    }

    /// Damped Newton iteration on the far-field residual
    /// `R = (u' - kappa u, v' - kappa v)` at the first node `T` below `level`,
    /// where `kappa = phi'(T) / phi(T) -> -(N-1)` is the logarithmic derivative
    /// of the decaying linear mode. `R` is evaluated by replaying the step
    /// sequence of the run from `x0`, which makes it smooth in `(a, b)`.
    fn polish(&self, x0: (T, T), level: T) -> Result<Polish<T>> {
        let traj = self.forward(x0.0, x0.1, level)?;
        let mesh = traj.times();
        let t_res = *mesh.last().expect("forward run has states");
        let (phi, dphi) = decaying_mode(t_res, self.n);
        let kappa = dphi / phi;
        let eval = |a: T, b: T| -> Result<([T; 2], RadialState<T>)> {
            let s = replay_on_mesh(a, b, self.n, &self.pq, &mesh)?;
            Ok(([s.du - kappa * s.u, s.dv - kappa * s.v], s))
        };
        let norm = |r: &[T; 2]| r[0].hypot(r[1]);
        let bound_of = |s: &RadialState<T>| self.opts.newton_tol * (s.u.abs() + s.v.abs() + T::min_positive_value());

        let (mut a, mut b) = x0;
        let (mut r, mut s) = eval(a, b)?;
        let mut iterations = 0;
        let mut converged = norm(&r) <= bound_of(&s);
        while !converged && iterations < self.opts.max_newton_iterations {
            iterations += 1;
            // Differentiate along the scaled directions (a, b) and (a, -b):
            // near a symmetric ground state the first is nearly singular and a
            // per-coordinate difference quotient loses it to cancellation.
            let h = self.opts.fd_step;
            let at = |s1: T, s2: T| eval(a * (T::one() + s1 + s2), b * (T::one() + s1 - s2));
            let ((p1, m1), (p2, m2)) = rayon::join(
                || rayon::join(|| at(h, T::zero()), || at(-h, T::zero())),
                || rayon::join(|| at(T::zero(), h), || at(T::zero(), -h)),
            );
            let (p1, m1, p2, m2) = (p1?.0, m1?.0, p2?.0, m2?.0);
            let two_h = T::c(2.0) * h;
            let j = [
                [(p1[0] - m1[0]) / two_h, (p2[0] - m2[0]) / two_h],
                [(p1[1] - m1[1]) / two_h, (p2[1] - m2[1]) / two_h],
            ];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det == T::zero() || !det.is_finite() {
                break;
            }
            let s1 = -(j[1][1] * r[0] - j[0][1] * r[1]) / det;
            let s2 = -(-j[1][0] * r[0] + j[0][0] * r[1]) / det;
            let (da, db) = (a * (s1 + s2), b * (s1 - s2));
            let cap = T::c(0.1);
            let mut lambda = T::one().min(cap * a / da.abs()).min(cap * b / db.abs());
            let mut accepted = false;
            for _ in 0..40 {
                let (na, nb) = (a + lambda * da, b + lambda * db);
                if na > T::zero() && nb > T::zero() {
                    if let Ok((nr, ns)) = eval(na, nb) {
                        if norm(&nr) < norm(&r) {
                            (a, b, r, s) = (na, nb, nr, ns);
                            accepted = true;
                            break;
                        }
                    }
                }
                lambda = lambda / T::c(2.0);
            }
            if !accepted {
                break;
            }
            converged = norm(&r) <= bound_of(&s);
        }
        if converged {
            Ok(Polish { x: (a, b), residual: norm(&r), bound: bound_of(&s), t: s.t, converged, iterations })
        } else {
            let (r0, s0) = eval(x0.0, x0.1)?;
            Ok(Polish { x: x0, residual: norm(&r0), bound: bound_of(&s0), t: s0.t, converged, iterations })
        }
    }

    /// Forward profile up to the residual level, then the decaying far-field
    /// solution through the same `(u, v)` values, integrated backwards from
    /// the end of the range.
    fn continue_to_far_field(&self, a: T, b: T) -> Result<(Trajectory<T>, T)> {
        let mut traj = self.forward(a, b, self.opts.final_residual_level)?;
        let m = *traj.last().expect("forward run has states");
        let t_m = m.t;
        let nm1 = self.n.damping::<T>();
        // keep the far-field values representable
        let budget = -T::c(0.5) * T::min_positive_value().ln();
        let t_far = self.ctl.t_max.min(t_m + budget / nm1);
        if t_far <= t_m {
            return Ok((traj, t_m));
        }
        let (phi_m, _) = decaying_mode(t_m, self.n);
        let (mut alpha, mut beta) = (m.u / phi_m, m.v / phi_m);
        let mut tail = None;
        for _ in 0..50 {
            let piece = self.backward_tail(alpha, beta, t_far, t_m)?;
            let end = *piece.first().expect("tail has states");
            let (ru, rv) = (m.u / end.u, m.v / end.v);
            alpha = alpha * ru;
            beta = beta * rv;
            let done =
                (ru - T::one()).abs() <= T::c(4.0) * T::epsilon() && (rv - T::one()).abs() <= T::c(4.0) * T::epsilon();
            tail = Some(piece);
            if done {
                break;
            }
        }
        let tail = tail.expect("at least one tail pass");
        traj.splice(tail);
        Ok((traj, t_m))
    }

    fn backward_tail(&self, alpha: T, beta: T, t_far: T, t_m: T) -> Result<Trajectory<T>> {
        let (phi, dphi) = decaying_mode(t_far, self.n);
        let y0 = [alpha * phi, alpha * dphi, beta * phi, beta * dphi];
        let f = field(self.n, self.pq);
        let tol = Tolerance { rel: self.ctl.rel_tol, abs: T::min_positive_value() };
        let mut states = vec![RadialState::from_vec(t_far, &y0)];
        let observer = |s: &StepData<T, 4>, _: &_| {
            states.push(RadialState::from_vec(s.t_new, &s.y_new));
            Flow::Continue
        };
        let stats = dop853::drive(&f, t_far, y0, t_m, tol, observer).map_err(|(e, _)| match e {
            DriveFailure::StepUnderflow { t, h } => {
                Error::IntegrationFailed { t: t.f64(), reason: format!("far-field step {h} underflows") }
            }
            DriveFailure::TooManySteps { t } => {
                Error::IntegrationFailed { t: t.f64(), reason: "far-field step budget exhausted".into() }
            }
        })?;
        states.reverse();
        let mut tail = Trajectory::from_states(states, self.ctl.rel_tol, self.ctl.abs_tol)?;
        tail.set_stats(stats);
        Ok(tail)
    }
}

/// `Some(true)` if the row passes from `v`-crossing to `u`-crossing through
/// quiet points, `Some(false)` if directly, `None` if it lacks either
/// crossing class.
fn row_meets_wedge<T: Scalar>(row: &Row<T>) -> Option<bool> {
    let ju = row.classes.iter().position(|c| *c == EventClass::U)?;
    let jv = row.classes[..ju].iter().rposition(|c| *c == EventClass::V)?;
    Some(row.classes[jv + 1..ju].contains(&EventClass::Quiet))
}

fn row_endpoints<T: Scalar>(row: &Row<T>) -> Option<(T, T)> {
    let ju = row.classes.iter().position(|c| *c == EventClass::U)?;
    let jv = row.classes[..ju].iter().rposition(|c| *c == EventClass::V)?;
    Some((row.bs[jv], row.bs[ju]))
}

/// The decaying solution of `w'' + (N-1) coth(t) w' = 0`:
/// `phi(t) = integral_t^inf sinh(s)^(1-N) ds` and `phi'(t) = -sinh(t)^(1-N)`.
///
/// Uses the binomial series of `(1 - e^(-2s))^(1-N)`, which converges fast
/// for the far-field arguments this is used at (`t >= 1`).
pub fn decaying_mode<T: Scalar>(t: T, n: SpaceDim) -> (T, T) {
    let m = n.get() as i64 - 1;
    let x = (-T::c(2.0) * t).exp();
    let scale = T::c(2f64.powi(m as i32)) * (-T::c(m as f64) * t).exp();
    // sum_k binom(m - 1 + k, k) x^k / (m + 2k)
    let mut sum = T::zero();
    let mut coeff = T::one();
    let mut xk = T::one();
    for k in 0..400i64 {
        let term = coeff * xk / T::c((m + 2 * k) as f64);
        sum = sum + term;
        if term <= T::epsilon() * sum {
            break;
        }
        coeff = coeff * T::c((m + k) as f64) / T::c((k + 1) as f64);
        xk = xk * x;
    }
    let sinh_pow =
        if t > T::c(20.0) { scale * (-T::c(m as f64) * (-x).ln_1p()).exp() } else { t.sinh().powi(-(m as i32)) };
    (scale * sum, -sinh_pow)
}
