//! Time series as CSV plus a JSON metadata sidecar.
//!
//! Values are written with 17 significant digits (`{:.16e}`), which is
//! enough to read every `f64` back bit for bit.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Column names plus one row of values per sample. The first column is `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `series` as CSV; an empty series gives a header-only file.
pub fn write_csv(series: &Series, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(format!("creating {}", path.display()), e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(&series.columns)?;
    for row in &series.rows {
        w.write_record(row.iter().map(|&v| format_value(v)))?;
    }
    w.flush().map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Series> {
    let mut r = csv::Reader::from_path(path)?;
    let columns = r.headers()?.iter().map(str::to_owned).collect();
    let mut series = Series::new(columns);
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| CliError::Validation(format!("bad number {s:?} in {}", path.display()))))
            .collect::<Result<Vec<_>>>()?;
        series.push(row);
    }
    Ok(series)
}

/// Contents of the `.meta.json` sidecar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub tool: String,
    pub tool_version: String,
    pub scenario_digest: String,
    pub columns: Vec<String>,
    pub rows: usize,
}

/// `series.csv` → `series.meta.json`.
pub fn meta_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

pub fn write_meta(series: &Series, digest: &str, csv_path: &Path) -> Result<()> {
    let meta = SeriesMeta {
        tool: env!("CARGO_PKG_NAME").to_owned(),
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
        scenario_digest: digest.to_owned(),
        columns: series.columns.clone(),
        rows: series.len(),
    };
    let path = meta_path(csv_path);
    let text = serde_json::to_string_pretty(&meta)? + "\n";
    std::fs::write(&path, text).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}
