//! Sliding surfaces, the saturated relay law and the rest-to-rest
//! time-optimal reference.
//!
//! Three surfaces are available:
//!
//! * optimal: `s = x1 + α·(m/U)·x2²·sign(x2)`, the decelerating parabola of
//!   the bounded double integrator scaled by `2α`;
//! * classic terminal: `s = x2 + β·|x1|^(q/p)·sign(x1)`;
//! * non-singular terminal: `s = x1 + β⁻¹·|x2|^(p/q)·sign(x2)`.
//!
//! Fractional powers always use the odd real extension `|x|^r·sign(x)`.

use serde::Serialize;

use crate::dynamics::{PlantParams, State};
use crate::error::{Error, Result};

/// `sign` with `sign(0) = 0`.
pub fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `|x|^r · sign(x)`.
fn odd_pow(x: f64, r: f64) -> f64 {
    x.abs().powf(r) * sign(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceSpec {
    Optimal { alpha: f64 },
    Classic { beta: f64, q_over_p: f64 },
    NonSingular { beta: f64, p_over_q: f64 },
}

impl SurfaceSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(
                    format!("surface.{name}"),
                    "must be finite and > 0",
                ))
            }
        };
        match *self {
            SurfaceSpec::Optimal { alpha } => positive("alpha", alpha),
            SurfaceSpec::Classic { beta, q_over_p } => {
                positive("beta", beta)?;
                if !(q_over_p > 0.0 && q_over_p < 1.0) {
                    return Err(Error::invalid(
                        "surface.q_over_p",
                        "power ratio must lie in (0, 1)",
                    ));
                }
                Ok(())
            }
            SurfaceSpec::NonSingular { beta, p_over_q } => {
                positive("beta", beta)?;
                if !(p_over_q.is_finite() && p_over_q > 1.0) {
                    return Err(Error::invalid(
                        "surface.p_over_q",
                        "power ratio must be > 1",
                    ));
                }
                Ok(())
            }
        }
    }

    /// Surface gain of the optimal surface, if this is one.
    pub fn alpha(&self) -> Option<f64> {
        match *self {
            SurfaceSpec::Optimal { alpha } => Some(alpha),
            _ => None,
        }
    }

    /// The non-singular surface with the same zero set as a classic one.
    ///
    /// Solving `x2 = −β·|x1|^r·sign(x1)` for `x1` gives
    /// `x1 = −β^(−1/r)·|x2|^(1/r)·sign(x2)`, so the matching gain is
    /// `β^(1/r)`; it coincides with `β` only for `β = 1`.
    pub fn matching_non_singular(&self) -> Option<SurfaceSpec> {
        match *self {
            SurfaceSpec::Classic { beta, q_over_p } => Some(SurfaceSpec::NonSingular {
                beta: beta.powf(1.0 / q_over_p),
                p_over_q: 1.0 / q_over_p,
            }),
            _ => None,
        }
    }
}

/// Sliding variable `s` of the selected surface at `state`.
pub fn eval_surface(spec: &SurfaceSpec, state: State, plant: &PlantParams) -> f64 {
    let State { x1, x2 } = state;
    match *spec {
        SurfaceSpec::Optimal { alpha } => x1 + alpha * plant.mass() / plant.u_max() * x2 * x2.abs(),
        SurfaceSpec::Classic { beta, q_over_p } => x2 + beta * odd_pow(x1, q_over_p),
        SurfaceSpec::NonSingular { beta, p_over_q } => x1 + odd_pow(x2, p_over_q) / beta,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ControlDecision {
    pub u: f64,
    pub s: f64,
}

/// Saturated relay `u = −U·sign(s)`; exactly zero on the surface.
pub fn relay_control(s: f64, plant: &PlantParams) -> ControlDecision {
    ControlDecision {
        u: -plant.u_max() * sign(s),
        s,
    }
}

/// Closed-loop `ṡ = x2 − 2α·|x2|·sign(s)` of the unperturbed plant on the
/// optimal surface.
pub fn sliding_derivative_optimal(state: State, s: f64, alpha: f64) -> f64 {
    state.x2 - 2.0 * alpha * state.x2.abs() * sign(s)
}

/// Single-switch time-optimal transfer from rest to the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BangBang {
    pub switch_state: State,
    pub switch_time: f64,
    pub final_time: f64,
}

/// Closed-form rest-to-rest bang-bang transfer to the origin: full
/// acceleration over the first half of the distance, full deceleration
/// over the second.
pub fn bang_bang_reference(initial: State, plant: &PlantParams) -> Result<BangBang> {
    initial.check_finite()?;
    if initial.x2 != 0.0 {
        return Err(Error::Unsupported(
            "bang-bang reference is only defined for transfers starting at rest".into(),
        ));
    }
    let distance = initial.x1.abs();
    let accel = plant.accel_max();
    let half_time = (distance / accel).sqrt();
    Ok(BangBang {
        switch_state: State {
            x1: initial.x1 / 2.0,
            x2: -sign(initial.x1) * (accel * distance).sqrt(),
        },
        switch_time: half_time,
        final_time: 2.0 * half_time,
    })
}

/// Sliding existence on the optimal surface: `α > 0.5`.
pub fn existence_condition(alpha: f64) -> bool {
    alpha > 0.5
}

/// Terminal-mode existence for the classic square-root surface under a
/// relay of acceleration amplitude `relay_gain`: `β² < 2·gain`.
///
/// `relay_gain` is the relay amplitude, not the optimal surface gain.
pub fn classic_existence_condition(relay_gain: f64, beta: f64) -> bool {
    beta * beta < 2.0 * relay_gain
}
