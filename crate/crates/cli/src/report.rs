//! Reports, CSV tables and plot data.
//!
//! Everything written here is a pure function of the inputs: no timestamps,
//! no host information, maps with sorted keys. Floats use the shortest
//! representation that parses back to the same value.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::CliResult;

pub const TOOL: &str = "ltlab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Le,
    Ge,
    Holds,
    Info,
}

/// One checked statement. `Info` entries are recorded but never fail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub relation: Relation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    pub passed: bool,
}

impl Assertion {
    pub fn le(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), relation: Relation::Le, value: Some(value), bound: Some(bound), passed: value <= bound }
    }

    pub fn ge(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), relation: Relation::Ge, value: Some(value), bound: Some(bound), passed: value >= bound }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self { name: name.into(), relation: Relation::Holds, value: None, bound: None, passed: ok }
    }

    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Self { name: name.into(), relation: Relation::Info, value: Some(value), bound: None, passed: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config: Value,
    pub results: Value,
    pub tolerances: BTreeMap<String, f64>,
    pub assertions: Vec<Assertion>,
    /// False when a Fermi-level tie makes the occupation ambiguous.
    pub authoritative: bool,
    pub passed: bool,
}

impl RunReport {
    pub fn new(command: &str, seed: u64, config: Value) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            command: command.to_string(),
            seed,
            config,
            results: Value::Null,
            tolerances: BTreeMap::new(),
            assertions: Vec::new(),
            authoritative: true,
            passed: true,
        }
    }

    pub fn finish(mut self) -> Self {
        self.passed = self.assertions.iter().all(|a| a.passed);
        self
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("report serialises");
        out.push(b'\n');
        out
    }
}

/// Shortest round-trip decimal form; `NaN`, `inf` and `-inf` for the rest.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:?}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    B(bool),
    S(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => fmt_f64(*x),
            Cell::I(n) => n.to_string(),
            Cell::B(b) => b.to_string(),
            Cell::S(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::I(n as i64)
    }
}

impl From<i64> for Cell {
    fn from(n: i64) -> Self {
        Cell::I(n)
    }
}

impl From<u32> for Cell {
    fn from(n: u32) -> Self {
        Cell::I(n as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::B(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::S(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::S(s)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::F)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.into_inner().map_err(|e| crate::error::CliError::Resource(e.to_string()))
    }
}

/// Two-column whitespace-separated data with a `#` comment header.
pub fn plot_data(x_label: &str, y_label: &str, points: &[(f64, f64)]) -> Vec<u8> {
    let mut out = format!("# {x_label} {y_label}\n");
    for (x, y) in points {
        out.push_str(&fmt_f64(*x));
        out.push(' ');
        out.push_str(&fmt_f64(*y));
        out.push('\n');
    }
    out.into_bytes()
}

/// Where a command puts its files. Without a directory the primary artifact
/// goes to stdout and secondary files are skipped.
#[derive(Debug, Clone)]
pub struct Sink {
    pub dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<&Path>) -> CliResult<Self> {
        if let Some(d) = dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(Self { dir: dir.map(Path::to_path_buf) })
    }

    /// Writes `name` into the output directory, or to stdout when there is none.
    pub fn primary(&self, name: &str, bytes: &[u8]) -> CliResult<()> {
        match &self.dir {
            Some(d) => std::fs::write(d.join(name), bytes)?,
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes)?;
                out.flush()?;
            }
        }
        Ok(())
    }

    /// Writes `name` into the output directory; a no-op without one.
    pub fn secondary(&self, name: &str, bytes: &[u8]) -> CliResult<()> {
        if let Some(d) = &self.dir {
            std::fs::write(d.join(name), bytes)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0, -2.5e-300, 1e16, 123456.789, f64::MIN_POSITIVE, 1.0 / 3.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn csv_has_exact_header() {
        let mut t = Table::new(&["k", "value", "flag"]);
        t.push(vec![0.5.into(), Cell::Empty, "log_divergence".into()]);
        let s = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(s, "k,value,flag\n0.5,,log_divergence\n");
    }

    #[test]
    fn assertion_relations() {
        assert!(Assertion::le("a", 1.0, 1.0).passed);
        assert!(!Assertion::le("a", f64::NAN, 1.0).passed);
        assert!(!Assertion::ge("a", 0.5, 1.0).passed);
        assert!(Assertion::info("a", f64::NAN).passed);
    }
}
