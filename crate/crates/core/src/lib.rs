//! Dual-barrier safety filtering for frontier exploration on occupancy grids.
//!
//! The crate is organized bottom-up:
//!
//! - [`grid`]: occupancy grids, exact signed distance fields, frontier clusters.
//! - [`barrier`]: shaping functions and halfspace constraints built from SDF samples.
//! - [`filter`]: closed-form projection onto the dual-safe set with a soft fallback.
//! - [`oracle`]: slow reference solvers and seeded verification sweeps.
//! - [`nominal`]: frontier goal selection and a potential-field velocity tracker.
//! - [`sim`]: ray-cast exploration simulator, traces and episode metrics.
//! - [`config`]: flat `key = value` run configuration.

pub mod barrier;
pub mod config;
pub mod filter;
pub mod grid;
pub mod nominal;
pub mod oracle;
pub mod sim;

/// Planar vector in meters or meters per second.
pub type Vec2 = nalgebra::Vector2<f64>;
