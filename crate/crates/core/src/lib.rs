//! Radial ground states of the Lane–Emden type Hamiltonian system
//!
//! ```text
//! -Δ u = |v|^(p-1) v,   -Δ v = |u|^(q-1) u
//! ```
//!
//! on hyperbolic space `H^N`, computed by shooting on the reduced radial ODE,
//! together with numerical checks of the qualitative properties of such
//! solutions (monotonicity, exponential decay, energy dissipation, integral
//! identities, positive action) and the exponent arithmetic deciding when
//! ground states are expected.
//!
//! The numerical core is generic over [`Scalar`] (`f32`, `f64`); exponent
//! classification additionally accepts exact rationals. The aliases at the
//! crate root fix the scalar to `f64`.

// `!(x > y)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod ode;
pub mod params;
pub mod scalar;
pub mod shooting;

pub use diagnostics::{
    characteristic_tail_bound, check_energy_dissipation, check_identities, check_monotone, diagnose, energy_j,
    fit_decay, identity_tolerance, DecayReport, DiagnosticsBundle, EnergyReport, IdentityReport, MonotoneReport,
    TailBoundReport,
};
pub use error::{Error, Result};
pub use geometry::{
    ball_radius_from_geodesic, geodesic_from_ball_radius, radial_integral, sphere_area, tail_integral, weight_k,
    BallRadius, RadialGrid, SpaceDim,
};
pub use ode::{
    integrate, rhs, taylor_start, Derivative, ExponentPair, IntegrateError, IntegrationFailure, IntegratorControls,
    RadialState, ShootingOutcome, StepStats, Trajectory,
};
pub use params::{
    characteristic_roots, classify_exponents, embedding_range, sobolev_pair_interval, CharacteristicRoots,
    ClosedInterval, EmbeddingRange, ExponentRegime, RegimeVerdicts,
};
pub use scalar::{odd_pow, ExponentField, Scalar};
pub use shooting::{
    bisect_on_diagonal, classify_outcome, decaying_mode, find_ground_state, find_ground_state_with,
    DiagonalGroundState, EventClass, FlipCell, GroundState, SeedRegion, ShootingBracket, SolverOptions,
};

/// `f64` instantiations of the generic types.
pub type ExponentPairF64 = ExponentPair<f64>;
pub type RadialStateF64 = RadialState<f64>;
pub type TrajectoryF64 = Trajectory<f64>;
pub type ShootingOutcomeF64 = ShootingOutcome<f64>;
pub type IntegratorControlsF64 = IntegratorControls<f64>;
pub type SeedRegionF64 = SeedRegion<f64>;
pub type SolverOptionsF64 = SolverOptions<f64>;
pub type GroundStateF64 = GroundState<f64>;
pub type DiagonalGroundStateF64 = DiagonalGroundState<f64>;
pub type ExponentRegimeF64 = ExponentRegime<f64>;
pub type CharacteristicRootsF64 = CharacteristicRoots<f64>;
pub type DiagnosticsF64 = DiagnosticsBundle<f64>;
