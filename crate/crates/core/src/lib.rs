//! Predefined-time first-order exact differentiation.
//!
//! The core differentiator drives the estimation error of `y` and `y'` to
//! zero before a user-chosen deadline `t0 + Tc` using time-base-generator
//! gains `kappa = 1 / (alpha (Tc - (t - t0)))`, then continues on a
//! stationary Levant law. Three baselines are provided for comparison: the
//! stationary Levant differentiator, a fixed-time differentiator with
//! polynomial correction terms (Seeber), and a prescribed-time linear observer
//! (Holloway).
//!
//! Modules:
//! - [`math`]: signed powers and the time-scale transformation.
//! - [`signal`]: signals with their `y''` bound family.
//! - [`bounds`]: certification of the bound family on grids.
//! - [`diff`]: gain laws of all four algorithms.
//! - [`sim`]: explicit Euler runs, settling detection, the transformed-time oracle.
//! - [`experiment`]: config files, sweeps, summaries and plot scripts.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod diff;
pub mod error;
pub mod experiment;
pub mod math;
pub mod par;
pub mod signal;
pub mod sim;

pub use diff::{Algorithm, DiffState, GainConfig, LevantParams};
pub use error::{Error, Result};
pub use math::TbgParams;
pub use par::Exec;
pub use signal::{BoundFunction, SignalSpec};
