//! Run reports: `report.json` with the resolved configuration, results and
//! checks; `tables/*.csv`; and `metadata.json` for wall-clock data, which is
//! kept apart so reports compare byte for byte across runs.

use crate::error::Result;
use serde::Serialize;
use serde_json::Value;
use std::fs;
use std::path::Path;

/// One pass/fail check of a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable acceptance rule, e.g. `<= 1e-12`.
    pub rule: String,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            rule: format!("<= {bound:e}"),
            pass: value <= bound,
        }
    }

    pub fn less_than(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            rule: format!("< {bound:e}"),
            pass: value < bound,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            rule: format!(">= {bound:e}"),
            pass: value >= bound,
        }
    }

    pub fn greater_than(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            rule: format!("> {bound:e}"),
            pass: value > bound,
        }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            rule: "holds".into(),
            pass: ok,
        }
    }
}

/// A CSV table written to `tables/<name>.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub result: Value,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Report {
    pub fn new(command: &str, config: Value, result: Value, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.pass);
        Self {
            command: command.into(),
            config,
            result,
            checks,
            passed,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Metadata {
    pub version: &'static str,
    pub started_unix_ms: u128,
    pub elapsed_ms: u128,
}

/// Write `report.json`, `metadata.json` and `tables/*.csv` under `out`.
pub fn write_outputs(out: &Path, report: &Report, tables: &[Table], meta: &Metadata) -> Result<()> {
    fs::create_dir_all(out)?;
    fs::write(out.join("report.json"), report.to_json()?)?;
    fs::write(
        out.join("metadata.json"),
        serde_json::to_string_pretty(meta)? + "\n",
    )?;
    if !tables.is_empty() {
        let dir = out.join("tables");
        fs::create_dir_all(&dir)?;
        for t in tables {
            fs::write(dir.join(format!("{}.csv", t.name)), t.to_csv()?)?;
        }
    }
    Ok(())
}
