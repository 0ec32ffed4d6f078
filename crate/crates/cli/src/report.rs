//! Versioned JSON reports and CSV plot data.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

pub const SCHEMA: &str = "hgibbs-report/1";

/// Whether a number is checked against a tolerance or only recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimKind {
    Asserted,
    Fitted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "test", rename_all = "snake_case")]
pub enum Criterion {
    Below { limit: f64 },
    AtMost { limit: f64 },
    Above { limit: f64 },
    Within { target: f64, tolerance: f64 },
    Holds,
}

#[derive(Debug, Clone, Serialize)]
pub struct Claim {
    pub name: String,
    pub kind: ClaimKind,
    pub value: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<Criterion>,
    /// Absent for fitted values.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
}

impl Claim {
    fn asserted(name: impl Into<String>, value: Value, criterion: Criterion, passed: bool) -> Self {
        Self {
            name: name.into(),
            kind: ClaimKind::Asserted,
            value,
            criterion: Some(criterion),
            passed: Some(passed),
        }
    }

    pub fn below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::asserted(
            name,
            value.into(),
            Criterion::Below { limit },
            value < limit,
        )
    }

    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::asserted(
            name,
            value.into(),
            Criterion::AtMost { limit },
            value <= limit,
        )
    }

    pub fn above(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::asserted(
            name,
            value.into(),
            Criterion::Above { limit },
            value > limit,
        )
    }

    pub fn within(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        let ok = (value - target).abs() <= tolerance;
        Self::asserted(
            name,
            value.into(),
            Criterion::Within { target, tolerance },
            ok,
        )
    }

    pub fn holds(name: impl Into<String>, value: bool) -> Self {
        Self::asserted(name, value.into(), Criterion::Holds, value)
    }

    pub fn fitted(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            kind: ClaimKind::Fitted,
            value: value.into(),
            criterion: None,
            passed: None,
        }
    }

    pub fn failed(&self) -> bool {
        self.passed == Some(false)
    }
}

/// Rows of plot data, written as `<command>_<name>.csv`.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: &'static str,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &'static str, header: &[&str]) -> Self {
        Self {
            name,
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: impl IntoIterator<Item = impl ToString>) {
        self.rows
            .push(row.into_iter().map(|v| v.to_string()).collect());
    }

    fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush().map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// What an experiment hands back for serialization.
#[derive(Debug, Default)]
pub struct Outcome {
    pub claims: Vec<Claim>,
    pub details: Value,
    pub tables: Vec<Table>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        !self.claims.iter().any(Claim::failed)
    }
}

#[derive(Serialize)]
struct Report<'a, P: Serialize> {
    schema: &'static str,
    command: &'a str,
    generated_unix: u64,
    config: &'a P,
    passed: bool,
    claims: &'a [Claim],
    plot_data: Vec<String>,
    details: &'a Value,
}

/// Write the JSON report and any CSV tables into `dir`; returns the report path.
pub fn write_report<P: Serialize>(
    dir: &Path,
    command: &str,
    config: &P,
    outcome: &Outcome,
    emit_csv: bool,
) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut plot_data = Vec::new();
    if emit_csv {
        for table in &outcome.tables {
            let name = format!("{command}_{}.csv", table.name);
            table.write(&dir.join(&name))?;
            plot_data.push(name);
        }
    }
    let report = Report {
        schema: SCHEMA,
        command,
        generated_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        config,
        passed: outcome.passed(),
        claims: &outcome.claims,
        plot_data,
        details: &outcome.details,
    };
    let path = dir.join(format!("{command}.json"));
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    fs::write(&path, text).map_err(|source| CliError::Write {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criteria_decide_pass() {
        assert_eq!(Claim::below("a", 1.0, 1.0).passed, Some(false));
        assert_eq!(Claim::at_most("a", 1.0, 1.0).passed, Some(true));
        assert_eq!(Claim::within("a", 1.04, 1.0, 0.05).passed, Some(true));
        assert_eq!(Claim::above("a", f64::NAN, 0.0).passed, Some(false));
        assert_eq!(Claim::fitted("a", 3.0).passed, None);
    }

    #[test]
    fn fitted_claims_never_fail_an_outcome() {
        let o = Outcome {
            claims: vec![Claim::fitted("c", 12.0), Claim::holds("ok", true)],
            ..Default::default()
        };
        assert!(o.passed());
    }

    #[test]
    fn claim_json_shape() {
        let v = serde_json::to_value(Claim::within("slope", -0.16, -1.0 / 6.0, 0.05)).unwrap();
        assert_eq!(v["kind"], "asserted");
        assert_eq!(v["criterion"]["test"], "within");
        assert_eq!(v["passed"], true);
        let f = serde_json::to_value(Claim::fitted("c", 1.0)).unwrap();
        assert!(f.get("passed").is_none());
    }
}
