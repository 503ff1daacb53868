//! One-dimensional compressible Euler flow coupled to a Maxwell-type stress
//! in divergence form, with a planning/verification harness for gradient
//! blow-up experiments.
//!
//! The governing system for density `rho`, velocity `u` and stress `S` is
//!
//! ```text
//! rho_t  + (rho u)_x                      = 0
//! (rho u)_t + (rho u^2 + p(rho) - S)_x    = 0
//! (rho S)_t + (rho u S)_x                 = (u_x - S) / tau
//! ```
//!
//! with pressure `p(rho) = rho^gamma`, `gamma > 1`. The crate provides:
//!
//! * [`model`] — state types, pressure/flux/characteristic-speed algebra and
//!   the entropy pair of the system;
//! * [`profile`] — the piecewise C¹ odd velocity profile used as large
//!   initial data, with an exact squared-norm formula;
//! * [`planner`] — selection of profile parameters (L, M) certifying every
//!   hypothesis of the finite-time blow-up criterion, plus the Riccati
//!   deadline `t*`;
//! * [`solver`] — finite-volume evolution (local Lax–Friedrichs order 1,
//!   MUSCL/minmod order 2) with operator-split exact stress relaxation;
//! * [`diagnostics`] — conserved/entropy/moment functionals per record and
//!   the numerical certification checks (cone, Hölder/Jensen, a-priori
//!   bounds, Riccati envelope);
//! * [`csvio`] — deterministic CSV serialization of records and snapshots;
//! * [`report`] — flat key/value (JSON) plan reports.

pub mod csvio;
pub mod diagnostics;
pub mod error;
mod exec;
pub mod model;
pub mod planner;
pub mod profile;
pub mod report;
pub mod solver;

pub use error::{Error, Result};
