//! Result documents: a CSV table and a JSON record written side by side.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use tempfile::NamedTempFile;

use crate::error::CliError;
use crate::scenario::{Resolved, ScenarioFile};

pub const TOOL: &str = "thzlab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// What one command produced.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub csv: String,
    pub data: Value,
}

pub fn metadata(command: &str, scenario: &ScenarioFile, resolved: &Resolved) -> Value {
    json!({
        "tool": TOOL,
        "version": VERSION,
        "command": command,
        "flags": scenario.flags,
        "calibration": resolved.calibration,
        "seed": scenario.simulation.seed,
        "scenario": scenario.to_json(),
    })
}

pub fn json_document(report: &Report, scenario: &ScenarioFile, resolved: &Resolved) -> Value {
    let mut doc = metadata(report.command, scenario, resolved);
    doc["data"] = report.data.clone();
    doc
}

/// The CSV table behind `#` comment lines carrying the metadata.
pub fn csv_document(report: &Report, scenario: &ScenarioFile, resolved: &Resolved) -> String {
    let f = &scenario.flags;
    let calibration = match &resolved.calibration {
        None => "none".to_string(),
        Some(c) => format!("{}={} l_max={}", c.target, c.target_value, c.l_max),
    };
    let mut out = String::new();
    out.push_str(&format!("# {TOOL} {VERSION} command={}\n", report.command));
    out.push_str(&format!(
        "# mode={} mu={} angular_mu_boundary={}\n",
        label(&f.aggregate_mode),
        label(&f.mu_convention),
        label(&f.angular_mu_boundary)
    ));
    out.push_str(&format!("# calibration={calibration}\n"));
    out.push_str(&format!("# seed={}\n", scenario.simulation.seed));
    out.push_str(&format!("# scenario={}\n", scenario.to_json()));
    out.push_str(&report.csv);
    out
}

/// Serde name of a unit enum variant.
fn label<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        Ok(v) => v.to_string(),
        Err(_) => String::new(),
    }
}

/// Writes `contents` to `path` through a sibling temporary file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(path, e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// `out.csv` and `out.json` for any `--out` path.
pub fn output_paths(out: &Path) -> (PathBuf, PathBuf) {
    (out.with_extension("csv"), out.with_extension("json"))
}

pub fn write_report(
    out: &Path,
    report: &Report,
    scenario: &ScenarioFile,
    resolved: &Resolved,
) -> Result<(PathBuf, PathBuf), CliError> {
    let (csv_path, json_path) = output_paths(out);
    write_atomic(
        &csv_path,
        csv_document(report, scenario, resolved).as_bytes(),
    )?;
    let mut json = serde_json::to_string_pretty(&json_document(report, scenario, resolved))
        .expect("document serializes");
    json.push('\n');
    write_atomic(&json_path, json.as_bytes())?;
    Ok((csv_path, json_path))
}
