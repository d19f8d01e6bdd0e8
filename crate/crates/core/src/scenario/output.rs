use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::analysis::ModeReport;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};

pub const TRAJECTORY_HEADER: [&str; 6] = ["t", "x1", "x2", "s", "u", "xi"];

/// Shortest decimal text that parses back to exactly `v`.
pub fn format_number(v: f64) -> String {
    format!("{v}")
}

/// Trajectory as CSV with header `t,x1,x2,s,u,xi`.
pub fn trajectory_csv(traj: &Trajectory) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::with_capacity(traj.len() * 64));
    let to_err = |e: csv::Error| Error::invalid("csv", e.to_string());
    w.write_record(TRAJECTORY_HEADER).map_err(to_err)?;
    for s in traj.samples() {
        w.write_record([
            format_number(s.t),
            format_number(s.state.x1),
            format_number(s.state.x2),
            format_number(s.s),
            format_number(s.u),
            format_number(s.xi),
        ])
        .map_err(to_err)?;
    }
    w.into_inner()
        .map_err(|e| Error::invalid("csv", e.to_string()))
}

#[derive(Serialize)]
struct ReportDocument<'a> {
    scenario: &'a str,
    #[serde(flatten)]
    report: &'a ModeReport,
}

/// JSON document for one analysed scenario.
pub fn report_json(name: &str, report: &ModeReport) -> String {
    let mut text = serde_json::to_string_pretty(&ReportDocument {
        scenario: name,
        report,
    })
    .expect("reports always serialize");
    text.push('\n');
    text
}

/// Writes `bytes` next to `path` under a temporary name, then renames it
/// into place.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}
