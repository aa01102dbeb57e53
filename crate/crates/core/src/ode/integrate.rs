//! Event-detecting integration of the radial system from the series start.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::dop853::{self, DriveFailure, Flow, StepData, StepStats, Tolerance};
use super::system::{field, taylor_start, ExponentPair, RadialState, MAX_T0};
use crate::error::{Error, Result};
use crate::geometry::SpaceDim;
use crate::scalar::Scalar;

/// Tolerances and event thresholds of one shooting run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorControls<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Largest geodesic distance integrated to.
    pub t_max: T,
    /// Magnitude of any state component that counts as blow-up.
    pub blowup_threshold: T,
    /// Series-start matching point.
    pub t0: T,
    /// Decay is declared once `max(|u|, |v|)` falls below
    /// `decay_margin * max(a, b)` while both profiles decrease.
    pub decay_margin: T,
}

impl<T: Scalar> Default for IntegratorControls<T> {
    fn default() -> Self {
        IntegratorControls {
            rel_tol: T::c(1e-10),
            abs_tol: T::c(1e-10),
            t_max: T::c(60.0),
            blowup_threshold: T::c(1e6),
            t0: T::c(1e-3),
            decay_margin: T::c(1e-8),
        }
    }
}

impl<T: Scalar> IntegratorControls<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, why: &str| Err(Error::InvalidInput(format!("{key}: {why}")));
        if !(self.rel_tol > T::zero() && self.rel_tol.is_finite()) {
            return bad("rel_tol", "must be positive and finite");
        }
        if !(self.abs_tol > T::zero() && self.abs_tol.is_finite()) {
            return bad("abs_tol", "must be positive and finite");
        }
        if !(self.t0 > T::zero() && self.t0 <= T::c(MAX_T0)) {
            return bad("t0", "must lie in (0, 0.1]");
        }
        if !(self.t_max > self.t0 && self.t_max.is_finite()) {
            return bad("t_max", "must be finite and exceed t0");
        }
        if !(self.blowup_threshold > T::one()) {
            return bad("blowup_threshold", "must exceed 1");
        }
        if !(self.decay_margin >= T::zero() && self.decay_margin < T::one()) {
            return bad("decay_margin", "must lie in [0, 1)");
        }
        Ok(())
    }

    /// Same controls with both tolerances multiplied by `factor`.
    pub fn with_tolerance_scaled(mut self, factor: T) -> Self {
        self.rel_tol = self.rel_tol * factor;
        self.abs_tol = self.abs_tol * factor;
        self
    }

    pub(crate) fn tolerance(&self) -> Tolerance<T> {
        Tolerance { rel: self.rel_tol, abs: self.abs_tol }
    }
}

/// How a shooting run ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ShootingOutcome<T> {
    /// Both profiles decreased below the decay margin.
    Decay { t_reached: T },
    /// `u` reached zero first.
    UCrossed { t_cross: T },
    /// `v` reached zero first.
    VCrossed { t_cross: T },
    /// Some component exceeded the blow-up threshold.
    Blowup { t_blow: T },
    /// None of the above happened before `t_max`.
    Undetermined { t_max: T },
}

impl<T: Scalar> ShootingOutcome<T> {
    pub fn time(&self) -> T {
        match *self {
            ShootingOutcome::Decay { t_reached } => t_reached,
            ShootingOutcome::UCrossed { t_cross } | ShootingOutcome::VCrossed { t_cross } => t_cross,
            ShootingOutcome::Blowup { t_blow } => t_blow,
            ShootingOutcome::Undetermined { t_max } => t_max,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ShootingOutcome::Decay { .. } => "decay",
            ShootingOutcome::UCrossed { .. } => "u_crossed",
            ShootingOutcome::VCrossed { .. } => "v_crossed",
            ShootingOutcome::Blowup { .. } => "blowup",
            ShootingOutcome::Undetermined { .. } => "undetermined",
        }
    }

    pub fn is_decay(&self) -> bool {
        matches!(self, ShootingOutcome::Decay { .. })
    }

    /// A sign change or blow-up: the initial data overshoot.
    pub fn overshoots(&self) -> bool {
        matches!(
            self,
            ShootingOutcome::UCrossed { .. } | ShootingOutcome::VCrossed { .. } | ShootingOutcome::Blowup { .. }
        )
    }

    pub fn same_variant(&self, other: &Self) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

impl<T: Scalar> fmt::Display for ShootingOutcome<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at t = {}", self.label(), self.time())
    }
}

/// Sampled radial profile, one state per accepted integrator step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    states: Vec<RadialState<T>>,
    rel_tol: T,
    abs_tol: T,
    stats: StepStats,
    /// Indices `i` for which `states[i - 1] -> states[i]` joins two separately
    /// integrated pieces instead of being an integrator step.
    joins: Vec<usize>,
}

impl<T: Scalar> Trajectory<T> {
    /// Builds a trajectory from explicit states, e.g. for synthetic profiles.
    pub fn from_states(states: Vec<RadialState<T>>, rel_tol: T, abs_tol: T) -> Result<Self> {
        for s in &states {
            if !s.is_finite() || s.t < T::zero() {
                return Err(Error::InvalidInput(format!("invalid trajectory state {s:?}")));
            }
        }
        if states.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(Error::InvalidInput("trajectory times must increase strictly".into()));
        }
        Ok(Trajectory { states, rel_tol, abs_tol, stats: StepStats::default(), joins: Vec::new() })
    }

    pub(crate) fn empty(tol: Tolerance<T>) -> Self {
        Trajectory {
            states: Vec::new(),
            rel_tol: tol.rel,
            abs_tol: tol.abs,
            stats: StepStats::default(),
            joins: Vec::new(),
        }
    }

    pub fn states(&self) -> &[RadialState<T>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn first(&self) -> Option<&RadialState<T>> {
        self.states.first()
    }

    pub fn last(&self) -> Option<&RadialState<T>> {
        self.states.last()
    }

    pub fn rel_tol(&self) -> T {
        self.rel_tol
    }

    pub fn abs_tol(&self) -> T {
        self.abs_tol
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    pub fn joins(&self) -> &[usize] {
        &self.joins
    }

    /// Whether the interval ending at node `i` is a single integrator step.
    pub fn is_step(&self, i: usize) -> bool {
        i > 0 && i < self.states.len() && !self.joins.contains(&i)
    }

    pub fn times(&self) -> Vec<T> {
        self.states.iter().map(|s| s.t).collect()
    }

    /// Appends `tail`, whose first state replaces the last state of `self`.
    pub(crate) fn splice(&mut self, tail: Trajectory<T>) {
        self.states.pop();
        let join = self.states.len();
        if !tail.states.is_empty() {
            self.joins.push(join);
        }
        self.joins.extend(tail.joins.iter().map(|j| j + join));
        self.states.extend(tail.states);
        self.stats = self.stats.merge(tail.stats);
    }

    pub(crate) fn set_stats(&mut self, stats: StepStats) {
        self.stats = stats;
    }

    pub(crate) fn push(&mut self, s: RadialState<T>) {
        self.states.push(s);
    }

    /// Writes the CSV export `t,u,du,v,dv` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,u,du,v,dv")?;
        for s in &self.states {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                s.t.f64(),
                s.u.f64(),
                s.du.f64(),
                s.v.f64(),
                s.dv.f64()
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// Integration stopped without any event: step size underflow or step
/// budget exhausted. Carries everything computed up to that point.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationFailure<T> {
    pub t: T,
    pub reason: String,
    pub partial: Trajectory<T>,
}

impl<T: Scalar> fmt::Display for IntegrationFailure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "integration failed at t = {}: {}", self.t, self.reason)
    }
}

impl<T: Scalar> std::error::Error for IntegrationFailure<T> {}

/// Error of [`integrate`]: either invalid input or a failed integration.
#[derive(Debug, Clone, PartialEq)]
pub enum IntegrateError<T> {
    Invalid(Error),
    Failed(IntegrationFailure<T>),
}

impl<T: Scalar> fmt::Display for IntegrateError<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntegrateError::Invalid(e) => e.fmt(f),
            IntegrateError::Failed(e) => e.fmt(f),
        }
    }
}

impl<T: Scalar> std::error::Error for IntegrateError<T> {}

impl<T: Scalar> From<Error> for IntegrateError<T> {
    fn from(e: Error) -> Self {
        IntegrateError::Invalid(e)
    }
}

impl<T: Scalar> From<IntegrateError<T>> for Error {
    fn from(e: IntegrateError<T>) -> Self {
        match e {
            IntegrateError::Invalid(e) => e,
            IntegrateError::Failed(f) => Error::IntegrationFailed { t: f.t.f64(), reason: f.reason },
        }
    }
}

/// Integrates from the series start at `ctl.t0` until the first event.
///
/// Events, in order of precedence within an accepted step: a zero of `u` or
/// `v` (located on the dense output to `rel_tol`; the earlier wins and an
/// exact tie goes to `u`), blow-up, decay, reaching `t_max`.
pub fn integrate<T: Scalar>(
    a: T,
    b: T,
    n: SpaceDim,
    pq: &ExponentPair<T>,
    ctl: &IntegratorControls<T>,
) -> std::result::Result<(Trajectory<T>, ShootingOutcome<T>), IntegrateError<T>> {
    ctl.validate()?;
    let (traj, stop) = run(a, b, n, pq, ctl, None)?;
    match stop {
        Stop::Event(o) => Ok((traj, o)),
        Stop::Level => unreachable!("no level stop requested"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Stop<T> {
    Event(ShootingOutcome<T>),
    /// `max(|u|, |v|)` fell to the requested level at the last node.
    Level,
}

/// Event-detecting run that can additionally stop at the first node where
/// `max(|u|, |v|) <= level`.
pub(crate) fn run<T: Scalar>(
    a: T,
    b: T,
    n: SpaceDim,
    pq: &ExponentPair<T>,
    ctl: &IntegratorControls<T>,
    level: Option<T>,
) -> std::result::Result<(Trajectory<T>, Stop<T>), IntegrateError<T>> {
    let start = taylor_start(a, b, n, pq, ctl.t0)?;
    let tol = ctl.tolerance();
    let mut traj = Trajectory::empty(tol);
    traj.push(start);

    let scale = a.max(b);
    let big = |y: &[T; 4]| y.iter().any(|x| x.abs() > ctl.blowup_threshold);
    if start.u <= T::zero() {
        return Ok((traj, Stop::Event(ShootingOutcome::UCrossed { t_cross: ctl.t0 })));
    }
    if start.v <= T::zero() {
        return Ok((traj, Stop::Event(ShootingOutcome::VCrossed { t_cross: ctl.t0 })));
    }
    if big(&start.to_vec()) {
        return Ok((traj, Stop::Event(ShootingOutcome::Blowup { t_blow: ctl.t0 })));
    }

    let f = field(n, *pq);
    let mut stop = None;
    let observer = |s: &StepData<T, 4>, f: &_| {
        let y = &s.y_new;
        if y[0] <= T::zero() || y[2] <= T::zero() {
            let dense = s.dense(f);
            let locate = |i: usize| {
                (y[i] <= T::zero()).then(|| refine_root(|t| dense.eval(t)[i], s.t_old, s.t_new, ctl.rel_tol))
            };
            let (tu, tv) = (locate(0), locate(2));
            let (t_cross, outcome) = match (tu, tv) {
                (Some(tu), Some(tv)) if tv < tu => (tv, ShootingOutcome::VCrossed { t_cross: tv }),
                (Some(tu), _) => (tu, ShootingOutcome::UCrossed { t_cross: tu }),
                (None, Some(tv)) => (tv, ShootingOutcome::VCrossed { t_cross: tv }),
                (None, None) => unreachable!(),
            };
            traj.push(RadialState::from_vec(t_cross, &dense.eval(t_cross)));
            stop = Some(Stop::Event(outcome));
            return Flow::Stop;
        }
        traj.push(RadialState::from_vec(s.t_new, y));
        let size = y[0].abs().max(y[2].abs());
        stop = if big(y) {
            Some(Stop::Event(ShootingOutcome::Blowup { t_blow: s.t_new }))
        } else if size < ctl.decay_margin * scale && y[1] < T::zero() && y[3] < T::zero() {
            Some(Stop::Event(ShootingOutcome::Decay { t_reached: s.t_new }))
        } else if level.is_some_and(|l| size <= l) {
            Some(Stop::Level)
        } else if s.t_new >= ctl.t_max {
            Some(Stop::Event(ShootingOutcome::Undetermined { t_max: ctl.t_max }))
        } else {
            None
        };
        if stop.is_some() {
            Flow::Stop
        } else {
            Flow::Continue
        }
    };
    let result = dop853::drive(&f, ctl.t0, start.to_vec(), ctl.t_max, tol, observer);
    match result {
        Ok(stats) => {
            traj.stats = stats;
            let stop = stop.unwrap_or(Stop::Event(ShootingOutcome::Undetermined { t_max: ctl.t_max }));
            Ok((traj, stop))
        }
        Err((failure, stats)) => {
            traj.stats = stats;
            let (t, reason) = match failure {
                DriveFailure::StepUnderflow { t, h } => (t, format!("step size {h} underflows")),
                DriveFailure::TooManySteps { t } => (t, "step budget exhausted".to_string()),
            };
            Err(IntegrateError::Failed(IntegrationFailure { t, reason, partial: traj }))
        }
    }
}

/// Zero of `g` in `(lo, hi]` given `g(lo) > 0 >= g(hi)`, by the Illinois
/// variant of regula falsi; returns a point with `g <= 0` within `rel_tol`
/// (relative in `t`) of the root.
pub(crate) fn refine_root<T: Scalar>(g: impl Fn(T) -> T, lo: T, hi: T, rel_tol: T) -> T {
    let (mut a, mut b) = (lo, hi);
    let (mut ga, mut gb) = (g(a), g(b));
    if gb > T::zero() || ga <= T::zero() {
        return hi;
    }
    let mut side = 0i8;
    for _ in 0..200 {
        if (b - a) <= rel_tol * b.abs() + T::epsilon() * b.abs() {
            break;
        }
        let mut c = (a * gb - b * ga) / (gb - ga);
        if !(c > a && c < b) {
            c = (a + b) / T::c(2.0);
        }
        let gc = g(c);
        if gc > T::zero() {
            a = c;
            ga = gc;
            if side == 1 {
                gb = gb / T::c(2.0);
            }
            side = 1;
        } else {
            b = c;
            gb = gc;
            if side == -1 {
                ga = ga / T::c(2.0);
            }
            side = -1;
        }
    }
    b
}

/// Replays the adaptive mesh `mesh` (starting at the series point) for new
/// initial values, without error control or events, so that the end state is
/// a smooth function of `(a, b)`.
pub(crate) fn replay_on_mesh<T: Scalar>(
    a: T,
    b: T,
    n: SpaceDim,
    pq: &ExponentPair<T>,
    mesh: &[T],
) -> Result<RadialState<T>> {
    let start = taylor_start(a, b, n, pq, mesh[0])?;
    let f = field(n, *pq);
    let ys = dop853::replay(&f, mesh, start.to_vec());
    let end = RadialState::from_vec(*mesh.last().expect("non-empty mesh"), ys.last().expect("non-empty"));
    if !end.is_finite() {
        return Err(Error::IntegrationFailed { t: end.t.f64(), reason: "replay produced non-finite state".into() });
    }
    Ok(end)
}
