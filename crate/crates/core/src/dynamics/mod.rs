//! Bounded double-integrator plant, its forward-Euler integrator and the
//! matched disturbance models acting on it.
//!
//! The plant is `m·ẍ = u + ξ` with `|u| ≤ U` and `|ξ| < U`.

mod perturbation;
mod simulate;

pub use perturbation::{
    eval_perturbation, FrictionState, PerturbationSpec, DEFAULT_DWELL, DEFAULT_SIGMA0,
};
pub use simulate::{simulate, Sample, SimConfig, Trajectory, DEFAULT_DT};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inertia and actuator bound of a one-degree-of-freedom motion plant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlantParams {
    mass: f64,
    u_max: f64,
}

impl PlantParams {
    pub fn new(mass: f64, u_max: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::invalid("plant.m", "inertia must be finite and > 0"));
        }
        if !(u_max.is_finite() && u_max > 0.0) {
            return Err(Error::invalid(
                "plant.u_max",
                "control bound must be finite and > 0",
            ));
        }
        Ok(Self { mass, u_max })
    }

    /// Inertia `m` (mass or moment of inertia).
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Control bound `U`; the relay applies `u ∈ {−U, 0, U}`.
    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    /// Maximal acceleration magnitude `U/m`.
    pub fn accel_max(&self) -> f64 {
        self.u_max / self.mass
    }
}

/// Position and velocity of the motion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x1: f64,
    pub x2: f64,
}

impl State {
    pub const ORIGIN: State = State { x1: 0.0, x2: 0.0 };

    pub fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }

    /// Euclidean norm in the phase plane.
    pub fn norm(&self) -> f64 {
        self.x1.hypot(self.x2)
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if !self.x1.is_finite() {
            return Err(Error::NonFinite { field: "x1" });
        }
        if !self.x2.is_finite() {
            return Err(Error::NonFinite { field: "x2" });
        }
        Ok(())
    }
}

/// One explicit forward-Euler step of `m·ẍ = u + ξ`.
///
/// Position advances with the velocity at the start of the step.
pub fn step_euler(state: State, u: f64, xi: f64, plant: &PlantParams, dt: f64) -> Result<State> {
    state.check_finite()?;
    if !u.is_finite() {
        return Err(Error::NonFinite { field: "u" });
    }
    if !xi.is_finite() {
        return Err(Error::NonFinite { field: "xi" });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid("dt", "step size must be finite and > 0"));
    }
    Ok(State {
        x1: state.x1 + dt * state.x2,
        x2: state.x2 + dt * (u + xi) / plant.mass,
    })
}
