//! CSV tables, pass/fail checks and the run manifest.

use std::fmt::Write as _;
use std::path::Path;

use crate::CliError;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: &'static str, header: &[&'static str]) -> Self {
        Table {
            file,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&x| num(x)).collect());
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)
            .map_err(|e| CliError::Io(e.to_string()))?;
        for row in &self.rows {
            w.write_record(row)
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join(self.file);
        std::fs::write(&path, self.to_bytes()?)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub measured: String,
    pub tolerance: String,
}

impl Check {
    /// Passes when `measured ≤ tolerance`.
    pub fn at_most(name: &'static str, measured: f64, tolerance: f64) -> Self {
        Check {
            name,
            passed: measured <= tolerance,
            measured: num(measured),
            tolerance: format!("<= {}", num(tolerance)),
        }
    }

    /// Passes when `measured ≥ tolerance`.
    pub fn at_least(name: &'static str, measured: f64, tolerance: f64) -> Self {
        Check {
            name,
            passed: measured >= tolerance,
            measured: num(measured),
            tolerance: format!(">= {}", num(tolerance)),
        }
    }

    pub fn flag(
        name: &'static str,
        passed: bool,
        measured: impl Into<String>,
        tolerance: impl Into<String>,
    ) -> Self {
        Check {
            name,
            passed,
            measured: measured.into(),
            tolerance: tolerance.into(),
        }
    }
}

/// What a subcommand hands back for writing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub values: Vec<(String, String)>,
}

impl Report {
    pub fn value(&mut self, key: &str, x: f64) {
        self.values.push((key.to_string(), num(x)));
    }

    pub fn text(&mut self, key: &str, v: impl Into<String>) {
        self.values.push((key.to_string(), v.into()));
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Line-oriented `key = value` manifest.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Manifest {
    lines: Vec<(String, String)>,
}

impl Manifest {
    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        let value: String = value.into();
        self.lines.push((key.into(), value.replace('\n', " ")));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.lines {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join("manifest.txt");
        std::fs::write(&path, self.render())
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

/// Parses a manifest back into ordered pairs.
pub fn parse_manifest(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}
