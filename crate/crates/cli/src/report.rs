use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;
use surface_poisson::conventions::Conventions;

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct ConventionConstants {
    pub sigma: f64,
    pub kappa: f64,
    pub beta_sign: f64,
    pub kirillov_sign: f64,
    pub tau_sign: f64,
}

impl From<Conventions> for ConventionConstants {
    fn from(c: Conventions) -> Self {
        Self {
            sigma: c.sigma,
            kappa: c.kappa,
            beta_sign: c.beta_sign,
            kirillov_sign: c.kirillov_sign(),
            tau_sign: c.tau_sign(),
        }
    }
}

/// One check. `value` is the worst residual (or mismatch count) over
/// `count` evaluations; `None` when the check could not run.
#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub name: String,
    pub value: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    pub count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Record {
    /// Passes when `value <= tolerance`.
    pub fn bound(name: &str, value: f64, tolerance: f64, count: usize) -> Self {
        Self {
            name: name.into(),
            value: Some(value),
            tolerance,
            passed: value.is_finite() && value <= tolerance,
            count,
            detail: None,
        }
    }

    /// Integer check: passes when there are no mismatches.
    pub fn exact(name: &str, mismatches: usize, count: usize) -> Self {
        Self {
            name: name.into(),
            value: Some(mismatches as f64),
            tolerance: 0.0,
            passed: mismatches == 0,
            count,
            detail: None,
        }
    }

    pub fn error(name: &str, tolerance: f64, err: impl std::fmt::Display) -> Self {
        Self {
            name: name.into(),
            value: None,
            tolerance,
            passed: false,
            count: 0,
            detail: Some(err.to_string()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> anyhow::Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
    pub all_passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config: RunConfig,
    pub conventions: ConventionConstants,
    pub records: Vec<Record>,
    pub tables: Vec<Table>,
    pub summary: Summary,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig, conventions: Conventions) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            config: config.clone(),
            conventions: conventions.into(),
            records: Vec::new(),
            tables: Vec::new(),
            summary: Summary {
                checks: 0,
                passed: 0,
                failed: 0,
                all_passed: true,
            },
        }
    }

    pub fn record(&mut self, r: Record) {
        self.records.push(r);
    }

    pub fn finish(&mut self) {
        let passed = self.records.iter().filter(|r| r.passed).count();
        self.summary = Summary {
            checks: self.records.len(),
            passed,
            failed: self.records.len() - passed,
            all_passed: passed == self.records.len(),
        };
    }

    pub fn to_json(&self) -> anyhow::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, out: Option<&Path>) -> anyhow::Result<()> {
        let json = self.to_json()?;
        match out {
            Some(path) => std::fs::write(path, json).with_context(|| format!("cannot write {}", path.display()))?,
            None => std::io::stdout().write_all(json.as_bytes())?,
        }
        Ok(())
    }

    /// Human-readable lines for stderr.
    pub fn summary_lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .records
            .iter()
            .map(|r| {
                let status = if r.passed { "PASS" } else { "FAIL" };
                let value = r.value.map_or("n/a".to_string(), |v| format!("{v:.3e}"));
                let mut line = format!("{status} {:<28} {value:>10} (tol {:.1e}, n={})", r.name, r.tolerance, r.count);
                if let Some(d) = &r.detail {
                    line.push_str(&format!(" {d}"));
                }
                line
            })
            .collect();
        out.push(format!(
            "{}: {}/{} checks passed",
            self.command, self.summary.passed, self.summary.checks
        ));
        out
    }
}
