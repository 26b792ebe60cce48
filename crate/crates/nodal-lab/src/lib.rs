//! Numerical laboratory for nodal radial solutions of the slightly
//! subcritical equation `-Delta u = |u|^{p-1} u`, `p = (n+2)/(n-2) - eps`,
//! on the unit ball (Dirichlet or Neumann boundary conditions) and on all
//! of space.
//!
//! The crate provides:
//!
//! - an adaptive radial shooting integrator with dense output, event
//!   detection, and carried weighted integrals ([`integrate_ivp`]);
//! - construction of the sign-changing radial solution with a prescribed
//!   number of nodal regions for either boundary condition
//!   ([`solutions`]);
//! - the closed-form concentration limit constants together with an
//!   independent recurrence route to the same table ([`constants`]);
//! - sweep, rate-fit, and extrapolation drivers that compare computed
//!   profiles against the predicted small-`eps` asymptotics
//!   ([`asymptotics`]);
//! - bubble-tower approximations and blow-up rescaling checks
//!   ([`bubbles`]).

pub mod asymptotics;
pub mod bubbles;
pub mod constants;
pub mod error;
pub mod ode;
pub mod params;
mod quad;
pub mod solutions;
pub mod special;

pub mod cli;

pub use bubbles::{
    blow_up_profile, dirichlet_remainder, neumann_remainder, single_bubble,
    whole_space_ansatz_check, BubbleTower,
};

pub use asymptotics::{
    default_schedule, pointwise_profile, quantity_spec, sweep, verify_theorem, QuantityId,
    QuantitySpec, SweepResult, TheoremReport,
};
pub use error::{Error, Result};
pub use ode::{
    integrate_ivp, integrate_ivp_with, CriticalPoint, EventList, IntegrationStats,
    IntegratorOptions, RadialProfile, Sample, StopReason, StopRule, ZeroCrossing,
};
pub use constants::{
    constants_via_recurrence, dirichlet_constants, kappa, neumann_constants, ConstantsTable,
};
pub use params::{Bc, ProblemParams};
pub use solutions::{dirichlet_solution, neumann_solution, NodalSolution};
