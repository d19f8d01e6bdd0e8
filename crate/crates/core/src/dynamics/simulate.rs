use serde::Serialize;

use super::{eval_perturbation, step_euler, FrictionState, PerturbationSpec, PlantParams, State};
use crate::control::{eval_surface, relay_control, SurfaceSpec};
use crate::error::{Error, Result};

/// Sample period of the reference experiments (1 kHz).
pub const DEFAULT_DT: f64 = 1e-3;

/// Fixed-step simulation settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    pub initial: State,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(dt: f64, t_end: f64, initial: State) -> Result<Self> {
        let cfg = Self {
            dt,
            t_end,
            initial,
            seed: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.t_end.is_finite()) {
            return Err(Error::invalid("sim", "dt and t_end must be finite"));
        }
        if !(0.0 < self.dt && self.dt < self.t_end) {
            return Err(Error::invalid("sim.dt", "requires 0 < dt < t_end"));
        }
        if !self.initial.is_finite() {
            return Err(Error::invalid(
                "sim.initial",
                "initial state must be finite",
            ));
        }
        Ok(())
    }

    /// Number of steps; the trajectory holds one more sample than this.
    ///
    /// Ratios within 1e-9 of an integer are treated as exact, so
    /// `2.0 / 0.001` gives 2000 steps.
    pub fn steps(&self) -> usize {
        let ratio = self.t_end / self.dt;
        let nearest = ratio.round();
        if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest as usize
        } else {
            ratio.floor() as usize
        }
    }
}

/// One logged instant of the closed loop.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub state: State,
    /// Sliding variable.
    pub s: f64,
    /// Applied control force.
    pub u: f64,
    /// Applied disturbance force.
    pub xi: f64,
}

/// Uniformly sampled closed-loop record, starting at `t = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    dt: f64,
    samples: Vec<Sample>,
}

impl Trajectory {
    /// Wraps externally produced samples. Timestamps must be strictly
    /// increasing.
    pub fn from_samples(dt: f64, samples: Vec<Sample>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid("trajectory.dt", "must be finite and > 0"));
        }
        if samples.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(Error::invalid(
                "trajectory",
                "timestamps must be strictly increasing",
            ));
        }
        Ok(Self { dt, samples })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time span between first and last sample.
    pub fn duration(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    /// Sample closest to time `t`.
    pub fn at(&self, t: f64) -> Option<&Sample> {
        let first = self.samples.first()?;
        let k = ((t - first.t) / self.dt).round().max(0.0) as usize;
        self.samples.get(k.min(self.samples.len() - 1))
    }
}

/// Runs the relay-controlled loop sample by sample: sliding variable,
/// control, disturbance, then one Euler step. Every sample from `t = 0` to
/// the last full step is recorded.
pub fn simulate(
    plant: &PlantParams,
    surface: &SurfaceSpec,
    pert: &PerturbationSpec,
    cfg: &SimConfig,
) -> Result<Trajectory> {
    surface.validate()?;
    pert.validate(plant)?;
    cfg.validate()?;

    let n = cfg.steps();
    let mut samples = Vec::with_capacity(n + 1);
    let mut state = cfg.initial;
    let mut friction = FrictionState::default();

    for k in 0..=n {
        let t = k as f64 * cfg.dt;
        let s = eval_surface(surface, state, plant);
        let u = relay_control(s, plant).u;
        let (xi, next_friction) = eval_perturbation(pert, t, state, friction, cfg.dt);
        if !s.is_finite() {
            return Err(Error::Diverged { t });
        }
        samples.push(Sample { t, state, s, u, xi });
        if k == n {
            break;
        }
        state = step_euler(state, u, xi, plant, cfg.dt)?;
        friction = next_friction;
        if !state.is_finite() {
            return Err(Error::Diverged {
                t: (k + 1) as f64 * cfg.dt,
            });
        }
    }

    Ok(Trajectory {
        dt: cfg.dt,
        samples,
    })
}
