use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::output::{report_json, trajectory_csv, write_atomic};
use super::{format_number, Scenario, ScenarioDoc};
use crate::analysis::{analyze, Mode, ModeReport};
use crate::dynamics::simulate;
use crate::error::{Error, Result};

pub const SUMMARY_FILE: &str = "summary.json";

/// Outcome of one scenario in a batch.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryEntry {
    pub name: String,
    pub mode: Option<Mode>,
    pub settling_time: Option<f64>,
    pub crossings: Option<usize>,
    pub residual_amplitude: Option<f64>,
    pub error: Option<String>,
    #[serde(skip)]
    pub exit_code: i32,
}

impl SummaryEntry {
    fn from_result(name: &str, result: Result<ModeReport>) -> Self {
        match result {
            Ok(report) => Self {
                name: name.to_string(),
                mode: Some(report.mode),
                settling_time: report.settling_time,
                crossings: Some(report.crossings.len()),
                residual_amplitude: report.residual_amplitude,
                error: None,
                exit_code: 0,
            },
            Err(e) => Self {
                name: name.to_string(),
                mode: None,
                settling_time: None,
                crossings: None,
                residual_amplitude: None,
                exit_code: e.exit_code(),
                error: Some(e.to_string()),
            },
        }
    }
}

/// Per-scenario results in input order.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BatchSummary {
    pub entries: Vec<SummaryEntry>,
}

impl BatchSummary {
    /// Zero when every scenario succeeded, else the largest failure code.
    pub fn exit_code(&self) -> i32 {
        self.entries.iter().map(|e| e.exit_code).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("summaries always serialize");
        text.push('\n');
        text
    }
}

fn run_one(sc: &Scenario, out_dir: &Path) -> Result<ModeReport> {
    let traj = simulate(&sc.plant, &sc.surface, &sc.perturbation, &sc.sim)?;
    let report = analyze(&traj, &sc.surface, &sc.analysis)?;
    write_atomic(
        &out_dir.join(format!("{}.trajectory.csv", sc.name)),
        &trajectory_csv(&traj)?,
    )?;
    write_atomic(
        &out_dir.join(format!("{}.report.json", sc.name)),
        report_json(&sc.name, &report).as_bytes(),
    )?;
    Ok(report)
}

fn check_unique(scenarios: &[Scenario]) -> Result<()> {
    let mut seen = HashSet::new();
    for sc in scenarios {
        if !seen.insert(sc.name.as_str()) {
            return Err(Error::invalid(
                "name",
                format!("duplicate scenario name `{}`", sc.name),
            ));
        }
    }
    Ok(())
}

/// Runs every scenario, possibly concurrently, writing
/// `<name>.trajectory.csv` and `<name>.report.json` for each plus a
/// `summary.json`.
///
/// Scenario failures are recorded in the summary and do not stop the
/// batch. Duplicate names are rejected before anything runs.
pub fn run_batch(scenarios: &[Scenario], out_dir: &Path) -> Result<BatchSummary> {
    check_unique(scenarios)?;
    for sc in scenarios {
        sc.validate()?;
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let entries = scenarios
        .par_iter()
        .map(|sc| SummaryEntry::from_result(&sc.name, run_one(sc, out_dir)))
        .collect();
    let summary = BatchSummary { entries };
    write_atomic(&out_dir.join(SUMMARY_FILE), summary.to_json().as_bytes())?;
    Ok(summary)
}

/// One scenario varied along a single numeric key.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub base: Scenario,
    /// Dotted key such as `surface.alpha` or `sim.dt`.
    pub parameter: String,
    pub values: Vec<f64>,
}

impl SweepSpec {
    /// The substituted scenarios, in value order.
    pub fn expand(&self) -> Result<Vec<Scenario>> {
        if self.values.is_empty() {
            return Err(Error::invalid("values", "sweep needs at least one value"));
        }
        let (section, key) = self
            .parameter
            .split_once('.')
            .filter(|(s, k)| !s.is_empty() && !k.is_empty() && !k.contains('.'))
            .ok_or_else(|| {
                Error::invalid(
                    "param",
                    format!("`{}` is not of the form section.key", self.parameter),
                )
            })?;
        if !matches!(
            section,
            "plant" | "surface" | "perturbation" | "sim" | "analysis"
        ) {
            return Err(Error::invalid(
                "param",
                format!("unknown section `{section}`"),
            ));
        }
        let base = toml::Value::try_from(ScenarioDoc::from(&self.base))
            .map_err(|e| Error::invalid("param", e.to_string()))?;

        self.values
            .iter()
            .map(|&v| {
                let mut doc = base.clone();
                let value = if key == "seed" {
                    if !(v >= 0.0 && v.fract() == 0.0 && v <= i64::MAX as f64) {
                        return Err(Error::invalid(
                            self.parameter.clone(),
                            "seed must be a non-negative integer",
                        ));
                    }
                    toml::Value::Integer(v as i64)
                } else {
                    toml::Value::Float(v)
                };
                let name = format!("{}_{}_{}", self.base.name, key, format_number(v));
                let table = doc.as_table_mut().expect("scenario document is a table");
                table.insert("name".into(), toml::Value::String(name));
                table
                    .entry(section)
                    .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                    .as_table_mut()
                    .expect("sections are tables")
                    .insert(key.to_string(), value);
                let parsed: ScenarioDoc =
                    doc.try_into().map_err(|e: toml::de::Error| Error::Parse {
                        origin: format!("sweep {}={}", self.parameter, format_number(v)),
                        message: e.to_string().trim_end().to_string(),
                    })?;
                parsed.build()
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub entry: SummaryEntry,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepTable {
    pub parameter: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// CSV with header `<parameter>,mode,settling_time,crossings,residual`.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let to_err = |e: csv::Error| Error::invalid("csv", e.to_string());
        w.write_record([
            self.parameter.as_str(),
            "mode",
            "settling_time",
            "crossings",
            "residual",
        ])
        .map_err(to_err)?;
        let opt = |v: Option<f64>| v.map(format_number).unwrap_or_default();
        for row in &self.rows {
            let e = &row.entry;
            w.write_record([
                format_number(row.value),
                e.mode
                    .map(|m| m.to_string())
                    .unwrap_or_else(|| "Failed".into()),
                opt(e.settling_time),
                e.crossings.map(|c| c.to_string()).unwrap_or_default(),
                opt(e.residual_amplitude),
            ])
            .map_err(to_err)?;
        }
        w.into_inner()
            .map_err(|e| Error::invalid("csv", e.to_string()))
    }

    pub fn exit_code(&self) -> i32 {
        self.rows
            .iter()
            .map(|r| r.entry.exit_code)
            .max()
            .unwrap_or(0)
    }
}

/// Runs the sweep as a batch and writes `<base>.sweep.csv` with one row per
/// value.
pub fn run_sweep(sweep: &SweepSpec, out_dir: &Path) -> Result<SweepTable> {
    let scenarios = sweep.expand()?;
    let summary = run_batch(&scenarios, out_dir)?;
    let table = SweepTable {
        parameter: sweep.parameter.clone(),
        rows: sweep
            .values
            .iter()
            .zip(summary.entries)
            .map(|(&value, entry)| SweepRow { value, entry })
            .collect(),
    };
    write_atomic(
        &out_dir.join(format!("{}.sweep.csv", sweep.base.name)),
        &table.to_csv()?,
    )?;
    Ok(table)
}
