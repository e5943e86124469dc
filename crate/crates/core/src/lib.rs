//! Periodic-orbit length spectrum of planar open billiards.
//!
//! Disk scatterers satisfying the no-eclipse condition are coded by words
//! with no adjacent repeats; every primitive necklace carries exactly one
//! periodic reflecting ray. This crate enumerates the necklaces, solves the
//! rays, linearizes them, and feeds the resulting length spectrum into
//! pressure/entropy/variance estimates, pair-correlation counts and
//! separation diagnostics.

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod correlations;
pub mod error;
pub mod geometry;
pub mod linearization;
pub mod orbit_solver;
pub mod separation;
pub mod store;
pub mod symbolic;
pub mod thermo;

pub use error::{Error, Result};
pub use geometry::{Disk, ObstacleSystem};
pub use orbit_solver::{solve_cycle, Orbit, SolverOptions};
pub use symbolic::Necklace;

/// Library version string, recorded in spectrum file headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
