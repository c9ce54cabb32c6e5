//! Check records, the JSON report and its table rendering.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ConfigError, Scenario};

/// Bumped whenever a field is renamed, removed or changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Record {
    pub suite: &'static str,
    pub name: String,
    pub inputs: Value,
    pub computed: Value,
    pub oracle: Value,
    /// Distance between `computed` and `oracle`.
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl Record {
    pub fn new(suite: &'static str, name: impl Into<String>, inputs: Value) -> Self {
        Record {
            suite,
            name: name.into(),
            inputs,
            computed: Value::Null,
            oracle: Value::Null,
            error: f64::INFINITY,
            tolerance: 0.0,
            pass: false,
            note: None,
            wall_time_ms: None,
        }
    }

    /// Fills in the comparison; passes iff `error ≤ tolerance`.
    pub fn compare(mut self, computed: Value, oracle: Value, error: f64, tolerance: f64) -> Self {
        self.computed = computed;
        self.oracle = oracle;
        self.error = error;
        self.tolerance = tolerance;
        self.pass = error <= tolerance;
        self
    }

    /// A check whose computation raised an error.
    pub fn failed(mut self, why: impl std::fmt::Display) -> Self {
        self.pass = false;
        self.note = Some(why.to_string());
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

pub fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: String,
    pub scenario: Scenario,
    pub summary: Summary,
    pub records: Vec<Record>,
}

impl Report {
    pub fn new(command: &str, scenario: Scenario, records: Vec<Record>) -> Self {
        let passed = records.iter().filter(|r| r.pass).count();
        Report {
            schema_version: SCHEMA_VERSION,
            tool: "oddindex",
            tool_version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            scenario,
            summary: Summary { total: records.len(), passed, failed: records.len() - passed },
            records,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), ConfigError> {
        std::fs::write(path, self.to_json())
            .map_err(|e| ConfigError::File { path: path.to_path_buf(), message: e.to_string() })
    }

    /// Human-readable table, one row per record, failing rows marked.
    pub fn table(&self) -> String {
        let header = ["suite", "check", "computed", "oracle", "error", "tol", "status"];
        let rows: Vec<[String; 7]> = self
            .records
            .iter()
            .map(|r| {
                [
                    r.suite.to_string(),
                    r.name.clone(),
                    show(&r.computed),
                    show(&r.oracle),
                    sci(r.error),
                    sci(r.tolerance),
                    if r.pass { "ok".into() } else { "FAIL".into() },
                ]
            })
            .collect();
        let mut width = header.map(|h| h.chars().count());
        for row in &rows {
            for (w, cell) in width.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, cells: &[String]| {
            let padded: Vec<String> =
                cells.iter().zip(&width).map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count()))).collect();
            let _ = writeln!(out, "{}", padded.join("  ").trim_end());
        };
        line(&mut out, &header.map(String::from));
        line(&mut out, &width.map(|w| "-".repeat(w)));
        for row in &rows {
            line(&mut out, row);
        }
        for r in self.records.iter().filter(|r| !r.pass) {
            if let Some(note) = &r.note {
                let _ = writeln!(out, "  {} / {}: {note}", r.suite, r.name);
            }
        }
        let _ = writeln!(out, "{} of {} checks passed", self.summary.passed, self.summary.total);
        out
    }
}

fn sci(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.is_finite() {
        format!("{x:.1e}")
    } else {
        "-".into()
    }
}

/// Six decimals with trailing zeros dropped; values that round to zero print as `0`.
fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    match s {
        "-0" | "" => "0".into(),
        s => s.into(),
    }
}

fn show(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::Number(n) => n.as_f64().map(num).unwrap_or_else(|| n.to_string()),
        // Two-element float arrays are complex numbers.
        Value::Array(a) if a.len() == 2 && a.iter().all(|x| x.is_f64()) => {
            let (re, im) = (a[0].as_f64().unwrap_or(0.0), a[1].as_f64().unwrap_or(0.0));
            if num(im) == "0" {
                num(re)
            } else if num(re) == "0" {
                format!("{}i", num(im))
            } else {
                format!("{}{}{}i", num(re), if im < 0.0 { "-" } else { "+" }, num(im.abs()))
            }
        }
        Value::Array(a) => format!("[{}]", a.iter().map(show).collect::<Vec<_>>().join(", ")),
        other => other.to_string(),
    }
}
