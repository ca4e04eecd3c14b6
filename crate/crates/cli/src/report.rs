//! Report rows, CSV/JSON serialization and the merged acceptance document.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ltf_core::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const ACCEPTANCE_FILE: &str = "acceptance.json";

/// How the deviation is compared with the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    /// `deviation <= tolerance`
    AtMost,
    /// `deviation < tolerance`
    Below,
    /// Informational row; never affects the outcome.
    Info,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::Below => "<",
            Relation::Info => "n/a",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub id: String,
    /// Inputs needed to recompute the row, as `key=value` pairs separated by `;`.
    pub inputs: String,
    pub measured: Option<Complex64>,
    pub reference: Option<Complex64>,
    pub deviation: Option<f64>,
    pub tolerance: Option<f64>,
    pub relation: Relation,
}

impl Row {
    pub fn check(id: impl Into<String>, inputs: impl Into<String>, measured: Complex64, reference: Complex64, deviation: f64, tolerance: f64) -> Self {
        Self {
            id: id.into(),
            inputs: inputs.into(),
            measured: Some(measured),
            reference: Some(reference),
            deviation: Some(deviation),
            tolerance: Some(tolerance),
            relation: Relation::AtMost,
        }
    }

    pub fn strict(mut self) -> Self {
        self.relation = Relation::Below;
        self
    }

    pub fn info(id: impl Into<String>, inputs: impl Into<String>, measured: Option<Complex64>, reference: Option<Complex64>) -> Self {
        Self { id: id.into(), inputs: inputs.into(), measured, reference, deviation: None, tolerance: None, relation: Relation::Info }
    }

    /// `None` for informational rows.
    pub fn pass(&self) -> Option<bool> {
        let (d, t) = (self.deviation?, self.tolerance?);
        match self.relation {
            Relation::AtMost => Some(d <= t),
            Relation::Below => Some(d < t),
            Relation::Info => None,
        }
    }
}

pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_else(|| "n/a".into())
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub rows: Vec<Row>,
    pub diagnostics: BTreeMap<String, Value>,
    pub config: Value,
    pub seed: u64,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub command: String,
    pub pass: bool,
    pub rows: usize,
    pub passed: usize,
    pub failed: usize,
    pub informational: usize,
    pub failures: Vec<String>,
    pub seed: u64,
    pub wall_time_s: f64,
    pub diagnostics: BTreeMap<String, Value>,
    pub config: Value,
}

impl Report {
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| a.id.cmp(&b.id));
    }

    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass() != Some(false))
    }

    pub fn summary(&self) -> Summary {
        let failures: Vec<String> = self.rows.iter().filter(|r| r.pass() == Some(false)).map(|r| r.id.clone()).collect();
        let informational = self.rows.iter().filter(|r| r.pass().is_none()).count();
        Summary {
            command: self.command.clone(),
            pass: failures.is_empty(),
            rows: self.rows.len(),
            passed: self.rows.len() - failures.len() - informational,
            failed: failures.len(),
            informational,
            failures,
            seed: self.seed,
            wall_time_s: self.wall_time,
            diagnostics: self.diagnostics.clone(),
            config: self.config.clone(),
        }
    }

    pub fn csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "id",
            "inputs",
            "measured_re",
            "measured_im",
            "reference_re",
            "reference_im",
            "deviation",
            "relation",
            "tolerance",
            "pass",
        ])?;
        for r in &self.rows {
            let pass = match r.pass() {
                Some(true) => "true",
                Some(false) => "false",
                None => "n/a",
            };
            w.write_record([
                r.id.clone(),
                r.inputs.clone(),
                opt(r.measured.map(|z| z.re)),
                opt(r.measured.map(|z| z.im)),
                opt(r.reference.map(|z| z.re)),
                opt(r.reference.map(|z| z.im)),
                opt(r.deviation),
                r.relation.symbol().into(),
                opt(r.tolerance),
                pass.into(),
            ])?;
        }
        Ok(w.into_inner().context("flushing csv")?)
    }

    /// Writes `<out>/<command>.csv` and `<out>/<command>.summary.json`, returning their paths.
    pub fn write(&self, out: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        let csv_path = out.join(format!("{}.csv", self.command));
        fs::write(&csv_path, self.csv_bytes()?).with_context(|| format!("writing {}", csv_path.display()))?;
        let json_path = out.join(format!("{}.summary.json", self.command));
        fs::write(&json_path, serde_json::to_string_pretty(&self.summary())? + "\n").with_context(|| format!("writing {}", json_path.display()))?;
        Ok((csv_path, json_path))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Acceptance {
    pub pass: bool,
    pub commands: BTreeMap<String, Summary>,
}

/// All `*.summary.json` files in `dir`, sorted.
pub fn summaries_in(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(".summary.json")) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

pub fn merge(paths: &[PathBuf]) -> Result<Acceptance> {
    let mut commands = BTreeMap::new();
    for p in paths {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let s: Summary = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
        commands.insert(s.command.clone(), s);
    }
    let pass = !commands.is_empty() && commands.values().all(|s| s.pass);
    Ok(Acceptance { pass, commands })
}

pub fn write_acceptance(out: &Path, acceptance: &Acceptance) -> Result<PathBuf> {
    let path = out.join(ACCEPTANCE_FILE);
    fs::write(&path, serde_json::to_string_pretty(acceptance)? + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(rows: Vec<Row>) -> Report {
        Report { command: "t".into(), rows, diagnostics: BTreeMap::new(), config: Value::Null, seed: 0, wall_time: 0.0 }
    }

    #[test]
    fn pass_flags() {
        let ok = Row::check("a", "", re(1.0), re(1.0), 0.0, 0.0);
        assert_eq!(ok.pass(), Some(true));
        assert_eq!(ok.clone().strict().pass(), Some(false));
        assert_eq!(Row::info("b", "", None, None).pass(), None);
        let mut r = report(vec![ok, Row::info("b", "", None, None)]);
        assert!(r.pass());
        r.rows.push(Row::check("c", "", re(2.0), re(1.0), 1.0, 0.5));
        let s = r.summary();
        assert!(!s.pass);
        assert_eq!((s.passed, s.failed, s.informational), (1, 1, 1));
        assert_eq!(s.failures, vec!["c".to_string()]);
    }

    #[test]
    fn csv_layout() {
        let mut r = report(vec![Row::check("z", "x=1", Complex64::new(0.1, -2.0), re(1.0), 0.5, 1.0), Row::info("a", "", None, None)]);
        r.sort();
        let text = String::from_utf8(r.csv_bytes().unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("a,,n/a,n/a"));
        assert_eq!(lines[2], "z,x=1,1.0000000000000001e-1,-2.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0,5.0000000000000000e-1,<=,1.0000000000000000e0,true");
    }
}
