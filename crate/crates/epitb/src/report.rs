use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::Scenario;
use crate::error::{CliError, Result};

/// One measured quantity. Checks without a tolerance are informational and
/// always pass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// `NaN` is written as `null`.
    #[serde(deserialize_with = "nan_from_null")]
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

fn nan_from_null<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

impl Check {
    /// Passes when `value ≤ tolerance`; `NaN` fails.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance: Some(tolerance), pass: value <= tolerance, note: String::new() }
    }

    /// Passes when `value > threshold`.
    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance: Some(threshold),
            pass: value > threshold,
            note: "must exceed the tolerance".into(),
        }
    }

    pub fn flag(name: impl Into<String>, pass: bool) -> Self {
        Self {
            name: name.into(),
            value: if pass { 1.0 } else { 0.0 },
            tolerance: None,
            pass,
            note: String::new(),
        }
    }

    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Self { name: name.into(), value, tolerance: None, pass: true, note: String::new() }
    }

    /// A step that could not be computed.
    pub fn failed(name: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Self { name: name.into(), value: f64::NAN, tolerance: None, pass: false, note: err.to_string() }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

/// Written as `report.json` next to the series. Wall time is printed, not
/// stored, so that reruns give identical files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool_version: String,
    pub scenario_digest: String,
    pub scenario: Scenario,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excluded_intervals: Vec<[f64; 2]>,
}

impl RunReport {
    pub fn new(scenario: &Scenario, checks: Vec<Check>) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            scenario_digest: scenario.digest(),
            scenario: scenario.clone(),
            checks,
            excluded_intervals: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(path, text).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        serde_json::from_str(&text).map_err(|source| CliError::Parse { path: path.to_path_buf(), source })
    }
}

pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "-".into()
    } else {
        format!("{v:.3e}")
    }
}

/// `PASS  name  value (tolerance)` lines.
pub fn check_table(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for c in checks {
        let tol = c.tolerance.map(|t| format!(" (tol {})", format_value(t))).unwrap_or_default();
        let note = if c.note.is_empty() { String::new() } else { format!("  {}", c.note) };
        out += &format!(
            "{}  {:width$}  {}{tol}{note}\n",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            format_value(c.value)
        );
    }
    out
}
