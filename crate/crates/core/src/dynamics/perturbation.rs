use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{PlantParams, State};
use crate::control::sign;
use crate::error::{Error, Result};

/// Default presliding stiffness of the friction model, force per metre.
pub const DEFAULT_SIGMA0: f64 = 1e5;
/// Default hold time of the random binary disturbance, seconds.
pub const DEFAULT_DWELL: f64 = 0.1;

/// Matched disturbance `ξ` entering the plant next to the control force.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PerturbationSpec {
    None,
    /// Dahl-type friction with Coulomb level `fc`, acting as `ξ = −f`.
    Friction {
        fc: f64,
        sigma0: f64,
    },
    /// `ξ(t) = A·sin(ω·t + phase)`.
    Harmonic {
        amplitude: f64,
        omega: f64,
        phase: f64,
    },
    /// `ξ ∈ {−A, +A}`, redrawn every `dwell` seconds from a seeded stream.
    RandomBinary {
        amplitude: f64,
        dwell: f64,
        seed: u64,
    },
}

impl PerturbationSpec {
    /// Upper bound of `|ξ|` over all times.
    pub fn amplitude(&self) -> f64 {
        match *self {
            PerturbationSpec::None => 0.0,
            PerturbationSpec::Friction { fc, .. } => fc,
            PerturbationSpec::Harmonic { amplitude, .. }
            | PerturbationSpec::RandomBinary { amplitude, .. } => amplitude.abs(),
        }
    }

    /// Checks parameter ranges and the bound `|ξ| < U` against the plant.
    pub fn validate(&self, plant: &PlantParams) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(
                    format!("perturbation.{name}"),
                    "must be finite",
                ))
            }
        };
        match *self {
            PerturbationSpec::None => {}
            PerturbationSpec::Friction { fc, sigma0 } => {
                finite("fc", fc)?;
                finite("sigma0", sigma0)?;
                if fc <= 0.0 {
                    return Err(Error::invalid(
                        "perturbation.fc",
                        "Coulomb level must be > 0",
                    ));
                }
                if sigma0 <= 0.0 {
                    return Err(Error::invalid(
                        "perturbation.sigma0",
                        "presliding stiffness must be > 0",
                    ));
                }
            }
            PerturbationSpec::Harmonic {
                amplitude,
                omega,
                phase,
            } => {
                finite("amplitude", amplitude)?;
                finite("omega", omega)?;
                finite("phase", phase)?;
            }
            PerturbationSpec::RandomBinary {
                amplitude, dwell, ..
            } => {
                finite("amplitude", amplitude)?;
                finite("dwell", dwell)?;
                if dwell <= 0.0 {
                    return Err(Error::invalid(
                        "perturbation.dwell",
                        "dwell time must be > 0",
                    ));
                }
            }
        }
        if self.amplitude() >= plant.u_max() {
            return Err(Error::invalid(
                "perturbation",
                format!(
                    "perturbation amplitude must be < U (matched disturbance bound): {} >= {}",
                    self.amplitude(),
                    plant.u_max()
                ),
            ));
        }
        Ok(())
    }
}

/// Internal presliding state of the friction model.
///
/// `z` is the friction force itself; it never leaves `[−Fc, Fc]` when
/// started inside.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FrictionState {
    pub z: f64,
}

impl FrictionState {
    /// Friction force `f` opposing the motion.
    pub fn force(&self) -> f64 {
        self.z
    }

    /// Advances `dz/dt = σ0·x2·(1 − (z/Fc)·sign(x2))` over one step of
    /// constant velocity.
    ///
    /// With `x2` frozen the equation is linear in `z` and is integrated in
    /// closed form, so the update is stable for any `σ0·|x2|·dt`.
    fn advance(self, x2: f64, fc: f64, sigma0: f64, dt: f64) -> Self {
        let dir = sign(x2);
        if dir == 0.0 {
            return self;
        }
        let target = fc * dir;
        let decay = (-sigma0 * x2.abs() * dt / fc).exp();
        FrictionState {
            z: target + (self.z - target) * decay,
        }
    }
}

/// Index of the hold interval containing `t`.
///
/// The product is nudged up by a few ulps so that sample times such as
/// `100·0.001` land in interval 1 rather than 0.
fn dwell_index(t: f64, dwell: f64) -> u64 {
    let k = (t / dwell * (1.0 + 4.0 * f64::EPSILON)).floor();
    k as i64 as u64
}

fn random_binary(amplitude: f64, dwell: f64, seed: u64, t: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(dwell_index(t, dwell));
    if rng.random::<bool>() {
        amplitude
    } else {
        -amplitude
    }
}

/// Evaluates the disturbance at time `t` for the state at the start of the
/// step, and advances the friction state across the step `[t, t + dt]`.
///
/// Non-friction specs return `fstate` unchanged.
pub fn eval_perturbation(
    spec: &PerturbationSpec,
    t: f64,
    state: State,
    fstate: FrictionState,
    dt: f64,
) -> (f64, FrictionState) {
    match *spec {
        PerturbationSpec::None => (0.0, fstate),
        PerturbationSpec::Friction { fc, sigma0 } => {
            (-fstate.force(), fstate.advance(state.x2, fc, sigma0, dt))
        }
        PerturbationSpec::Harmonic {
            amplitude,
            omega,
            phase,
        } => (amplitude * (omega * t + phase).sin(), fstate),
        PerturbationSpec::RandomBinary {
            amplitude,
            dwell,
            seed,
        } => (random_binary(amplitude, dwell, seed, t), fstate),
    }
}
