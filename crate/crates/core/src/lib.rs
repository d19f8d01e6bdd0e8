//! Optimal terminal sliding mode control of bounded second-order motion
//! systems.
//!
//! The controller switches the full actuator force `±U` on the surface
//! `s = x1 + α·(m/U)·x2²·sign(x2)`, which for `α = 0.5` is the decelerating
//! branch of the time-optimal bang-bang trajectory. `α > 0.5` gives a
//! terminal sliding mode, `0 < α ≤ 0.5` a twisting mode.
//!
//! * [`dynamics`]: plant, Euler integrator, matched disturbances, closed loop.
//! * [`control`]: sliding surfaces, relay law, time-optimal reference.
//! * [`analysis`]: crossings, mode classification and run metrics.
//! * [`scenario`]: configuration files, batch/sweep runners, CSV and JSON output.

pub mod analysis;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod scenario;

pub use error::{Error, Result};
