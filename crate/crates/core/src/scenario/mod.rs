//! Scenario configuration files, batch and sweep execution, and the
//! on-disk artifacts they produce.
//!
//! A scenario file is a small TOML document:
//!
//! ```toml
//! name = "paper_friction"
//!
//! [plant]
//! m = 0.1
//! u_max = 1.0
//!
//! [surface]
//! kind = "optimal"      # optimal | classic | non_singular
//! alpha = 0.6
//!
//! [perturbation]
//! kind = "friction"     # none | friction | harmonic | random_binary
//! fc = 0.5
//!
//! [sim]                 # every key optional
//! dt = 0.001
//! t_end = 2.0
//! x1 = -1.0
//! x2 = 0.0
//!
//! [analysis]            # every key optional
//! eps_x1 = 0.01
//! ```
//!
//! Unknown keys, and keys that do not belong to the selected `kind`, are
//! rejected.

mod batch;
mod output;

pub use batch::{
    run_batch, run_sweep, BatchSummary, SummaryEntry, SweepRow, SweepSpec, SweepTable, SUMMARY_FILE,
};
pub use output::{format_number, report_json, trajectory_csv, TRAJECTORY_HEADER};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{AnalysisParams, DEFAULT_EPS_X1, DEFAULT_EPS_X2, DEFAULT_ETA};
use crate::control::SurfaceSpec;
use crate::dynamics::{
    PerturbationSpec, PlantParams, SimConfig, State, DEFAULT_DT, DEFAULT_DWELL, DEFAULT_SIGMA0,
};
use crate::error::{Error, Result};

pub const DEFAULT_T_END: f64 = 2.0;
pub const DEFAULT_INITIAL: State = State { x1: -1.0, x2: 0.0 };

/// A fully validated experiment definition.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub plant: PlantParams,
    pub surface: SurfaceSpec,
    pub perturbation: PerturbationSpec,
    pub sim: SimConfig,
    pub analysis: AnalysisParams,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        validate_name(&self.name)?;
        self.surface.validate()?;
        self.perturbation.validate(&self.plant)?;
        self.sim.validate()?;
        self.analysis.validate()
    }

    /// Normalized configuration text with every default spelled out.
    pub fn to_config_string(&self) -> String {
        toml::to_string(&ScenarioDoc::from(self)).expect("scenario documents always serialize")
    }
}

fn validate_name(name: &str) -> Result<()> {
    if name.is_empty() {
        return Err(Error::invalid("name", "must be nonempty"));
    }
    if !name
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        || name.starts_with('.')
    {
        return Err(Error::invalid(
            "name",
            format!("`{name}` may only contain ASCII letters, digits, '_', '-' and '.'"),
        ));
    }
    Ok(())
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ScenarioDoc {
    name: String,
    plant: PlantDoc,
    surface: SurfaceDoc,
    #[serde(default)]
    perturbation: PerturbationDoc,
    #[serde(default)]
    sim: SimDoc,
    #[serde(default)]
    analysis: AnalysisDoc,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct PlantDoc {
    m: f64,
    u_max: f64,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct SurfaceDoc {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q_over_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_over_q: Option<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct PerturbationDoc {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    fc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phase: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dwell: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl Default for PerturbationDoc {
    fn default() -> Self {
        Self {
            kind: "none".into(),
            fc: None,
            sigma0: None,
            amplitude: None,
            omega: None,
            phase: None,
            dwell: None,
            seed: None,
        }
    }
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct SimDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct AnalysisDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    band: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_x1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_x2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    window: Option<f64>,
}

/// Rejects keys that are set but meaningless for the chosen kind.
fn only(section: &str, kind: &str, keys: &[(&str, bool)], allowed: &[&str]) -> Result<()> {
    for (key, present) in keys {
        if *present && !allowed.contains(key) {
            return Err(Error::invalid(
                format!("{section}.{key}"),
                format!("not a parameter of {section} kind `{kind}`"),
            ));
        }
    }
    Ok(())
}

fn required(section: &str, key: &str, v: Option<f64>) -> Result<f64> {
    v.ok_or_else(|| Error::invalid(format!("{section}.{key}"), "missing required key"))
}

impl SurfaceDoc {
    fn build(&self) -> Result<SurfaceSpec> {
        let keys = [
            ("alpha", self.alpha.is_some()),
            ("beta", self.beta.is_some()),
            ("q_over_p", self.q_over_p.is_some()),
            ("p_over_q", self.p_over_q.is_some()),
        ];
        let spec = match self.kind.as_str() {
            "optimal" => {
                only("surface", "optimal", &keys, &["alpha"])?;
                SurfaceSpec::Optimal {
                    alpha: required("surface", "alpha", self.alpha)?,
                }
            }
            "classic" => {
                only("surface", "classic", &keys, &["beta", "q_over_p"])?;
                SurfaceSpec::Classic {
                    beta: required("surface", "beta", self.beta)?,
                    q_over_p: self.q_over_p.unwrap_or(0.5),
                }
            }
            "non_singular" => {
                only("surface", "non_singular", &keys, &["beta", "p_over_q"])?;
                SurfaceSpec::NonSingular {
                    beta: required("surface", "beta", self.beta)?,
                    p_over_q: self.p_over_q.unwrap_or(2.0),
                }
            }
            other => {
                return Err(Error::invalid(
                    "surface.kind",
                    format!("unknown kind `{other}` (expected optimal, classic or non_singular)"),
                ))
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    fn from_spec(spec: &SurfaceSpec) -> Self {
        match *spec {
            SurfaceSpec::Optimal { alpha } => Self {
                kind: "optimal".into(),
                alpha: Some(alpha),
                ..Self::default()
            },
            SurfaceSpec::Classic { beta, q_over_p } => Self {
                kind: "classic".into(),
                beta: Some(beta),
                q_over_p: Some(q_over_p),
                ..Self::default()
            },
            SurfaceSpec::NonSingular { beta, p_over_q } => Self {
                kind: "non_singular".into(),
                beta: Some(beta),
                p_over_q: Some(p_over_q),
                ..Self::default()
            },
        }
    }
}

impl PerturbationDoc {
    fn build(&self, plant: &PlantParams, sim_seed: u64) -> Result<PerturbationSpec> {
        let keys = [
            ("fc", self.fc.is_some()),
            ("sigma0", self.sigma0.is_some()),
            ("amplitude", self.amplitude.is_some()),
            ("omega", self.omega.is_some()),
            ("phase", self.phase.is_some()),
            ("dwell", self.dwell.is_some()),
            ("seed", self.seed.is_some()),
        ];
        let p = "perturbation";
        let spec = match self.kind.as_str() {
            "none" => {
                only(p, "none", &keys, &[])?;
                PerturbationSpec::None
            }
            "friction" => {
                only(p, "friction", &keys, &["fc", "sigma0"])?;
                PerturbationSpec::Friction {
                    fc: required(p, "fc", self.fc)?,
                    sigma0: self.sigma0.unwrap_or(DEFAULT_SIGMA0),
                }
            }
            "harmonic" => {
                only(p, "harmonic", &keys, &["amplitude", "omega", "phase"])?;
                PerturbationSpec::Harmonic {
                    amplitude: required(p, "amplitude", self.amplitude)?,
                    omega: required(p, "omega", self.omega)?,
                    phase: self.phase.unwrap_or(0.0),
                }
            }
            "random_binary" => {
                only(p, "random_binary", &keys, &["amplitude", "dwell", "seed"])?;
                PerturbationSpec::RandomBinary {
                    amplitude: required(p, "amplitude", self.amplitude)?,
                    dwell: self.dwell.unwrap_or(DEFAULT_DWELL),
                    seed: self.seed.unwrap_or(sim_seed),
                }
            }
            other => {
                return Err(Error::invalid(
                    "perturbation.kind",
                    format!(
                    "unknown kind `{other}` (expected none, friction, harmonic or random_binary)"
                ),
                ))
            }
        };
        spec.validate(plant)?;
        Ok(spec)
    }

    fn from_spec(spec: &PerturbationSpec) -> Self {
        let base = Self::default();
        match *spec {
            PerturbationSpec::None => base,
            PerturbationSpec::Friction { fc, sigma0 } => Self {
                kind: "friction".into(),
                fc: Some(fc),
                sigma0: Some(sigma0),
                ..base
            },
            PerturbationSpec::Harmonic {
                amplitude,
                omega,
                phase,
            } => Self {
                kind: "harmonic".into(),
                amplitude: Some(amplitude),
                omega: Some(omega),
                phase: Some(phase),
                ..base
            },
            PerturbationSpec::RandomBinary {
                amplitude,
                dwell,
                seed,
            } => Self {
                kind: "random_binary".into(),
                amplitude: Some(amplitude),
                dwell: Some(dwell),
                seed: Some(seed),
                ..base
            },
        }
    }
}

impl ScenarioDoc {
    pub(crate) fn build(&self) -> Result<Scenario> {
        validate_name(&self.name)?;
        let plant = PlantParams::new(self.plant.m, self.plant.u_max)?;
        let surface = self.surface.build()?;
        let seed = self.sim.seed.unwrap_or(0);
        let perturbation = self.perturbation.build(&plant, seed)?;
        let mut sim = SimConfig::new(
            self.sim.dt.unwrap_or(DEFAULT_DT),
            self.sim.t_end.unwrap_or(DEFAULT_T_END),
            State::new(
                self.sim.x1.unwrap_or(DEFAULT_INITIAL.x1),
                self.sim.x2.unwrap_or(DEFAULT_INITIAL.x2),
            ),
        )?;
        sim.seed = seed;
        let analysis = AnalysisParams {
            band: self.analysis.band,
            eps_x1: self.analysis.eps_x1.unwrap_or(DEFAULT_EPS_X1),
            eps_x2: self.analysis.eps_x2.unwrap_or(DEFAULT_EPS_X2),
            eta: self.analysis.eta.unwrap_or(DEFAULT_ETA),
            window: self.analysis.window,
        };
        analysis.validate()?;
        if let Some(window) = analysis.window {
            if window > sim.t_end {
                return Err(Error::invalid(
                    "analysis.window",
                    "must not exceed sim.t_end",
                ));
            }
        }
        Ok(Scenario {
            name: self.name.clone(),
            plant,
            surface,
            perturbation,
            sim,
            analysis,
        })
    }
}

impl From<&Scenario> for ScenarioDoc {
    fn from(sc: &Scenario) -> Self {
        ScenarioDoc {
            name: sc.name.clone(),
            plant: PlantDoc {
                m: sc.plant.mass(),
                u_max: sc.plant.u_max(),
            },
            surface: SurfaceDoc::from_spec(&sc.surface),
            perturbation: PerturbationDoc::from_spec(&sc.perturbation),
            sim: SimDoc {
                dt: Some(sc.sim.dt),
                t_end: Some(sc.sim.t_end),
                x1: Some(sc.sim.initial.x1),
                x2: Some(sc.sim.initial.x2),
                seed: Some(sc.sim.seed),
            },
            analysis: AnalysisDoc {
                band: sc.analysis.band,
                eps_x1: Some(sc.analysis.eps_x1),
                eps_x2: Some(sc.analysis.eps_x2),
                eta: Some(sc.analysis.eta),
                window: sc.analysis.window,
            },
        }
    }
}

/// Parses and validates scenario text.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    parse_scenario_from(text, "<config>")
}

/// As [`parse_scenario`], with `origin` (usually a path) in error messages.
pub fn parse_scenario_from(text: &str, origin: &str) -> Result<Scenario> {
    let doc: ScenarioDoc = toml::from_str(text).map_err(|e| Error::Parse {
        origin: origin.to_string(),
        message: e.to_string().trim_end().to_string(),
    })?;
    doc.build().map_err(|e| match e {
        Error::Invalid { field, reason } => Error::Invalid {
            field: format!("{origin}: {field}"),
            reason,
        },
        other => other,
    })
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario_from(&text, &path.display().to_string())
}

/// All `*.cfg` files directly inside `dir`, sorted by file name.
pub fn load_scenario_dir(dir: &Path) -> Result<Vec<Scenario>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|ext| ext == "cfg") {
            paths.push(path);
        }
    }
    paths.sort();
    paths.iter().map(|p| load_scenario(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const FRICTION: &str = r#"
name = "paper_friction"

[plant]
m = 0.1
u_max = 1.0

[surface]
kind = "optimal"
alpha = 0.6

[perturbation]
kind = "friction"
fc = 0.5
"#;

    #[test]
    fn defaults_are_applied() {
        let sc = parse_scenario(FRICTION).unwrap();
        assert_eq!(sc.plant.mass(), 0.1);
        assert_eq!(sc.plant.u_max(), 1.0);
        assert_eq!(sc.surface, SurfaceSpec::Optimal { alpha: 0.6 });
        assert_eq!(
            sc.perturbation,
            PerturbationSpec::Friction {
                fc: 0.5,
                sigma0: 1e5
            }
        );
        assert_eq!(sc.sim.dt, 0.001);
        assert_eq!(sc.sim.t_end, 2.0);
        assert_eq!(sc.sim.initial, State::new(-1.0, 0.0));
        assert_eq!(sc.analysis, AnalysisParams::default());
    }

    #[test]
    fn normalized_dump_round_trips() {
        let sc = parse_scenario(FRICTION).unwrap();
        let dump = sc.to_config_string();
        assert!(dump.contains("dt = 0.001"), "{dump}");
        assert!(dump.contains("sigma0 = 100000.0"), "{dump}");
        assert_eq!(parse_scenario(&dump).unwrap(), sc);
    }

    #[test]
    fn amplitude_bound_rejected() {
        let text = FRICTION.replace(
            "kind = \"friction\"\nfc = 0.5",
            "kind = \"harmonic\"\namplitude = 1.5\nomega = 20.0",
        );
        let err = parse_scenario(&text).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("must be < U"), "{err}");
    }

    #[test]
    fn unknown_key_rejected_with_context() {
        let text = FRICTION.replace("alpha = 0.6", "alpha = 0.6\ngain = 2.0");
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("gain"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn foreign_key_for_kind_rejected() {
        let text = FRICTION.replace("fc = 0.5", "fc = 0.5\nomega = 3.0");
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("perturbation.omega"), "{err}");
    }

    #[test]
    fn missing_required_key() {
        let text = FRICTION.replace("alpha = 0.6", "");
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("surface.alpha"), "{err}");
    }

    #[test]
    fn bad_names_rejected() {
        assert!(parse_scenario(&FRICTION.replace("paper_friction", "")).is_err());
        assert!(parse_scenario(&FRICTION.replace("paper_friction", "a/b")).is_err());
    }

    #[test]
    fn random_binary_seed_falls_back_to_sim_seed() {
        let text = FRICTION.replace(
            "kind = \"friction\"\nfc = 0.5",
            "kind = \"random_binary\"\namplitude = 0.5",
        ) + "\n[sim]\nseed = 9\n";
        let sc = parse_scenario(&text).unwrap();
        assert_eq!(
            sc.perturbation,
            PerturbationSpec::RandomBinary {
                amplitude: 0.5,
                dwell: 0.1,
                seed: 9
            }
        );
    }

    #[test]
    fn malformed_text_is_parse_error() {
        let err = parse_scenario("name = \n[plant").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }
}
