//! The radial ODE system, its series start, and adaptive integration with
//! event detection.

pub(crate) mod dop853;
mod integrate;
mod system;

pub use dop853::StepStats;
pub use integrate::{integrate, IntegrateError, IntegrationFailure, IntegratorControls, ShootingOutcome, Trajectory};
pub(crate) use integrate::{replay_on_mesh, run, Stop};
pub(crate) use system::field;
pub use system::{rhs, taylor_start, Derivative, ExponentPair, RadialState, MAX_T0};
