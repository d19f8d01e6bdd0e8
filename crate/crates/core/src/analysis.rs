//! Post-processing of closed-loop trajectories: surface crossings, mode
//! classification, settling and reaching metrics, Lyapunov and
//! reachability monitors, and the residual oscillation amplitude.

use serde::Serialize;

use crate::control::{sign, SurfaceSpec};
use crate::dynamics::{Sample, State, Trajectory};
use crate::error::{Error, Result};

pub const DEFAULT_EPS_X1: f64 = 1e-2;
pub const DEFAULT_EPS_X2: f64 = 1e-1;
pub const DEFAULT_ETA: f64 = 0.01;
/// Ratio of peak `|s|` to its largest step change marking an excursion.
const EXCURSION_FACTOR: f64 = 5.0;

/// Fraction of the horizon used as the post-settling window.
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.25;

/// Tolerances used when analysing a run.
///
/// `band` and `window` are derived from the run when left unset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnalysisParams {
    pub band: Option<f64>,
    pub eps_x1: f64,
    pub eps_x2: f64,
    pub eta: f64,
    pub window: Option<f64>,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        Self {
            band: None,
            eps_x1: DEFAULT_EPS_X1,
            eps_x2: DEFAULT_EPS_X2,
            eta: DEFAULT_ETA,
            window: None,
        }
    }
}

impl AnalysisParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(
                    format!("analysis.{name}"),
                    "must be finite and > 0",
                ))
            }
        };
        if let Some(band) = self.band {
            positive("band", band)?;
        }
        positive("eps_x1", self.eps_x1)?;
        positive("eps_x2", self.eps_x2)?;
        positive("eta", self.eta)?;
        if let Some(window) = self.window {
            positive("window", window)?;
        }
        Ok(())
    }

    pub fn in_box(&self, state: State) -> bool {
        state.x1.abs() <= self.eps_x1 && state.x2.abs() <= self.eps_x2
    }

    /// Sliding band for this run: the configured one, else
    /// `5·dt·(1 + 2α)·max|x2|` for the optimal surface. Other surfaces use
    /// five times the largest one-step change of `s`.
    pub fn band_for(&self, traj: &Trajectory, surface: &SurfaceSpec) -> f64 {
        self.band.unwrap_or_else(|| default_band(traj, surface))
    }

    /// Post-settling window: configured, else the last quarter of the run.
    pub fn window_for(&self, traj: &Trajectory) -> f64 {
        self.window
            .unwrap_or(DEFAULT_WINDOW_FRACTION * traj.duration())
    }
}

/// Default sliding band of a run, with a floor of `1e-12`.
pub fn default_band(traj: &Trajectory, surface: &SurfaceSpec) -> f64 {
    let samples = traj.samples();
    let band = match surface.alpha() {
        Some(alpha) => {
            let max_x2 = samples.iter().map(|s| s.state.x2.abs()).fold(0.0, f64::max);
            5.0 * traj.dt() * (1.0 + 2.0 * alpha) * max_x2
        }
        None => {
            5.0 * samples
                .windows(2)
                .map(|w| (w[1].s - w[0].s).abs())
                .fold(0.0, f64::max)
        }
    };
    band.max(1e-12)
}

/// A strict sign change of the sliding variable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrossingEvent {
    /// Linearly interpolated crossing time.
    pub t: f64,
    /// Linearly interpolated state at the crossing.
    pub state: State,
    /// Last sample index before the crossing.
    pub index: usize,
}

/// One event per strict sign change of `s` between samples.
///
/// A run of exact zeros counts as a single crossing, placed at its first
/// zero, when the signs on both sides differ; it counts as nothing when
/// they agree.
pub fn detect_crossings(traj: &Trajectory) -> Vec<CrossingEvent> {
    crossings_of(traj.samples())
}

fn crossings_of(samples: &[Sample]) -> Vec<CrossingEvent> {
    let mut events = Vec::new();
    // last sample with nonzero s
    let mut anchor: Option<usize> = None;
    for (k, cur) in samples.iter().enumerate() {
        let sk = sign(cur.s);
        if sk == 0.0 {
            continue;
        }
        if let Some(i) = anchor {
            let prev = &samples[i];
            if sign(prev.s) != sk {
                events.push(if k == i + 1 {
                    let f = prev.s / (prev.s - cur.s);
                    CrossingEvent {
                        t: prev.t + f * (cur.t - prev.t),
                        state: State {
                            x1: prev.state.x1 + f * (cur.state.x1 - prev.state.x1),
                            x2: prev.state.x2 + f * (cur.state.x2 - prev.state.x2),
                        },
                        index: i,
                    }
                } else {
                    let zero = &samples[i + 1];
                    CrossingEvent {
                        t: zero.t,
                        state: zero.state,
                        index: i,
                    }
                });
            }
        }
        anchor = Some(k);
    }
    events
}

/// First sample index on or past the surface, if any.
fn reach_index(samples: &[Sample], crossings: &[CrossingEvent]) -> Option<usize> {
    let first_zero = samples.iter().position(|s| s.s == 0.0);
    let first_cross = crossings.first().map(|c| c.index + 1);
    match (first_zero, first_cross) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Mode {
    /// Reaches the surface and stays inside the sliding band afterwards.
    Terminal,
    /// Leaves the surface after every crossing while the crossing norms
    /// shrink.
    Twisting,
    /// Sliding intervals interrupted by excursions.
    Mixed,
    NotConverged,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Mode::Terminal => "Terminal",
            Mode::Twisting => "Twisting",
            Mode::Mixed => "Mixed",
            Mode::NotConverged => "NotConverged",
        };
        f.write_str(name)
    }
}

/// Settings for [`classify_mode`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Classifier {
    pub band: f64,
    /// Crossings inside this box are below the resolution of the discrete
    /// relay and are left out of the twisting norm test.
    pub eps_x1: f64,
    pub eps_x2: f64,
}

impl Classifier {
    pub fn new(band: f64) -> Self {
        Self {
            band,
            eps_x1: DEFAULT_EPS_X1,
            eps_x2: DEFAULT_EPS_X2,
        }
    }

    fn resolved(&self, c: &CrossingEvent) -> bool {
        c.state.x1.abs() > self.eps_x1 || c.state.x2.abs() > self.eps_x2
    }
}

/// Whether `norms` is strictly decreasing.
pub fn strictly_decreasing(norms: &[f64]) -> bool {
    norms.windows(2).all(|w| w[1] < w[0])
}

/// Norms of the crossings resolved outside the settling box.
pub fn resolved_crossing_norms(crossings: &[CrossingEvent], eps_x1: f64, eps_x2: f64) -> Vec<f64> {
    let c = Classifier {
        band: 0.0,
        eps_x1,
        eps_x2,
    };
    crossings
        .iter()
        .filter(|e| c.resolved(e))
        .map(|e| e.state.norm())
        .collect()
}

/// Whether `|s|` makes a genuine excursion over `segment`: it exceeds the
/// band, or it grows to several times its largest one-step change, which
/// a chattering relay cannot do.
fn leaves_surface(segment: &[Sample], band: f64) -> bool {
    if segment.len() < 2 {
        return false;
    }
    let peak = segment.iter().map(|x| x.s.abs()).fold(0.0, f64::max);
    let step = segment
        .windows(2)
        .map(|w| (w[1].s - w[0].s).abs())
        .fold(0.0, f64::max);
    peak > band || peak > EXCURSION_FACTOR * step
}

/// Classifies the convergence regime of a run.
pub fn classify_mode(traj: &Trajectory, classifier: &Classifier) -> (Mode, Vec<CrossingEvent>) {
    let samples = traj.samples();
    let crossings = crossings_of(samples);
    let band = classifier.band;
    let Some(reach) = reach_index(samples, &crossings) else {
        return (Mode::NotConverged, crossings);
    };
    let outside = |k: usize| samples[k].s.abs() > band;

    if !(reach..samples.len()).any(outside) {
        return (Mode::Terminal, crossings);
    }

    let resolved: Vec<&CrossingEvent> = crossings
        .iter()
        .filter(|c| classifier.resolved(c))
        .collect();
    if resolved.len() >= 3 {
        let norms: Vec<f64> = resolved.iter().map(|c| c.state.norm()).collect();
        let leaves_each_time = resolved
            .windows(2)
            .all(|w| leaves_surface(&samples[w[0].index + 1..=w[1].index], band));
        if strictly_decreasing(&norms) && leaves_each_time {
            return (Mode::Twisting, crossings);
        }
    }

    // a sliding interval is a run of in-band samples during which the
    // relay keeps switching
    let mut sliding = false;
    let mut run_start = None;
    let mut switches = 0usize;
    let mut next_crossing = crossings.iter().peekable();
    for k in reach..samples.len() {
        while next_crossing.peek().is_some_and(|c| c.index + 1 < k) {
            next_crossing.next();
        }
        if outside(k) {
            run_start = None;
            switches = 0;
            continue;
        }
        if run_start.is_none() {
            run_start = Some(k);
        }
        if next_crossing
            .peek()
            .is_some_and(|c| c.index + 1 == k && c.index >= run_start.unwrap_or(k))
        {
            switches += 1;
            if switches >= 2 {
                sliding = true;
                break;
            }
        }
    }
    if sliding {
        (Mode::Mixed, crossings)
    } else {
        (Mode::NotConverged, crossings)
    }
}

/// First time after which `|x1| ≤ eps_x1` and `|x2| ≤ eps_x2` hold at
/// every later sample.
pub fn settling_time(traj: &Trajectory, eps_x1: f64, eps_x2: f64) -> Option<f64> {
    let samples = traj.samples();
    let inside = |s: &Sample| s.state.x1.abs() <= eps_x1 && s.state.x2.abs() <= eps_x2;
    match samples.iter().rposition(|s| !inside(s)) {
        None => samples.first().map(|s| s.t),
        Some(k) => samples.get(k + 1).map(|s| s.t),
    }
}

/// Upper bound on the reaching time under `sign(s)·ṡ ≤ −η`: `|s0|/η`.
pub fn reaching_time_bound(s0: f64, eta: f64) -> f64 {
    s0.abs() / eta
}

/// `(−η + 2α|x2|) − x2·sign(s)`; positive when η-reachability holds.
pub fn reachability_margin(x2: f64, s: f64, alpha: f64, eta: f64) -> f64 {
    (-eta + 2.0 * alpha * x2.abs()) - x2 * sign(s)
}

/// `V = s²/2` per sample.
pub fn lyapunov_series(traj: &Trajectory) -> Vec<f64> {
    traj.samples().iter().map(|s| 0.5 * s.s * s.s).collect()
}

/// Largest `|x1|` over the final `window` seconds.
pub fn limit_cycle_amplitude(traj: &Trajectory, window: f64) -> Result<f64> {
    if !(window.is_finite() && window > 0.0) {
        return Err(Error::invalid("window", "must be finite and > 0"));
    }
    if window > traj.duration() {
        return Err(Error::invalid(
            "window",
            format!(
                "{window} s exceeds the trajectory duration {} s",
                traj.duration()
            ),
        ));
    }
    let Some(last) = traj.last() else {
        return Err(Error::invalid("trajectory", "empty"));
    };
    let from = last.t - window;
    Ok(traj
        .samples()
        .iter()
        .filter(|s| s.t >= from)
        .map(|s| s.state.x1.abs())
        .fold(0.0, f64::max))
}

/// Recovery after one sign change of the disturbance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Recovery {
    /// First sample carrying the new disturbance sign.
    pub t_change: f64,
    /// Time from the change until the state is back inside the settling
    /// box; absent if it never returns within the horizon.
    pub delay: Option<f64>,
}

/// For each sign change of `ξ` after the state first entered the settling
/// box, the time until the state is back inside the box for good, meaning
/// until the next sign change or the end of the run.
pub fn disturbance_recovery(traj: &Trajectory, eps_x1: f64, eps_x2: f64) -> Vec<Recovery> {
    let samples = traj.samples();
    let inside = |s: &Sample| s.state.x1.abs() <= eps_x1 && s.state.x2.abs() <= eps_x2;
    let Some(entry) = samples.iter().position(inside) else {
        return Vec::new();
    };
    let changes: Vec<usize> = (entry.max(1)..samples.len())
        .filter(|&k| sign(samples[k - 1].xi) * sign(samples[k].xi) < 0.0)
        .collect();
    changes
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let end = changes.get(i + 1).copied().unwrap_or(samples.len());
            let back = match (k..end).rev().find(|&j| !inside(&samples[j])) {
                None => Some(k),
                // still outside when the disturbance flips again
                Some(j) if j + 1 == end => (end..samples.len()).find(|&j| inside(&samples[j])),
                Some(j) => Some(j + 1),
            };
            Recovery {
                t_change: samples[k].t,
                delay: back.map(|j| samples[j].t - samples[k].t),
            }
        })
        .collect()
}

/// Reachability margins over the reaching phase.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MarginSummary {
    pub eta: f64,
    /// Samples before the first crossing.
    pub reaching_samples: usize,
    pub min_margin: Option<f64>,
    pub max_margin: Option<f64>,
    pub fraction_positive: Option<f64>,
    /// `|s0|/η*` with `η*` the smallest margin, when that is positive.
    pub reach_time_bound: Option<f64>,
}

fn margin_summary(samples: &[Sample], reach: Option<usize>, alpha: f64, eta: f64) -> MarginSummary {
    let end = reach.unwrap_or(samples.len());
    let margins: Vec<f64> = samples[..end]
        .iter()
        .map(|s| reachability_margin(s.state.x2, s.s, alpha, eta))
        .collect();
    let min = margins.iter().copied().reduce(f64::min);
    let max = margins.iter().copied().reduce(f64::max);
    let positive = margins.iter().filter(|&&m| m > 0.0).count();
    let fraction = (!margins.is_empty()).then(|| positive as f64 / margins.len() as f64);
    let bound = match (min, samples.first()) {
        (Some(m), Some(first)) if m > 0.0 => Some(reaching_time_bound(first.s, m)),
        _ => None,
    };
    MarginSummary {
        eta,
        reaching_samples: margins.len(),
        min_margin: min,
        max_margin: max,
        fraction_positive: fraction,
        reach_time_bound: bound,
    }
}

/// Full analysis of one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeReport {
    pub mode: Mode,
    pub band: f64,
    pub crossings: Vec<CrossingEvent>,
    /// Time of the first surface crossing.
    pub reach_time: Option<f64>,
    pub settling_time: Option<f64>,
    /// Largest `|x1|` over the post-settling part of the final window.
    pub residual_amplitude: Option<f64>,
    /// Present for the optimal surface only.
    pub margins: Option<MarginSummary>,
}

pub fn analyze(
    traj: &Trajectory,
    surface: &SurfaceSpec,
    params: &AnalysisParams,
) -> Result<ModeReport> {
    params.validate()?;
    if traj.is_empty() {
        return Err(Error::invalid("trajectory", "empty"));
    }
    let samples = traj.samples();
    let band = params.band_for(traj, surface);
    let classifier = Classifier {
        band,
        eps_x1: params.eps_x1,
        eps_x2: params.eps_x2,
    };
    let (mode, crossings) = classify_mode(traj, &classifier);
    let reach = reach_index(samples, &crossings);
    let reach_time = reach.map(|k| match crossings.first() {
        Some(c) if c.index + 1 == k => c.t,
        _ => samples[k].t,
    });
    let settling = settling_time(traj, params.eps_x1, params.eps_x2);
    let residual = settling.map(|ts| {
        let last = samples[samples.len() - 1].t;
        let from = ts.max(last - params.window_for(traj).min(traj.duration()));
        samples
            .iter()
            .filter(|s| s.t >= from)
            .map(|s| s.state.x1.abs())
            .fold(0.0, f64::max)
    });
    let margins = surface
        .alpha()
        .map(|alpha| margin_summary(samples, reach, alpha, params.eta));

    Ok(ModeReport {
        mode,
        band,
        crossings,
        reach_time,
        settling_time: settling,
        residual_amplitude: residual,
        margins,
    })
}
