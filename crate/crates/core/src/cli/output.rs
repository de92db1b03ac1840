//! Report envelope and CSV/JSON writers.

use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::ffield::Tower;

pub const SCHEMA: &str = "gausslab/1";

pub type Row = Map<String, Value>;

/// Builds a row with a fixed column order.
#[derive(Default)]
pub struct RowBuilder(Row);

impl RowBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(mut self, key: &str, value: impl Serialize) -> Self {
        self.0.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn build(self) -> Row {
        self.0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FieldFingerprint {
    pub p: u64,
    /// Degree of the character field `F_{q^d}` over `F_p`.
    pub m: u32,
    pub q: u64,
    pub d: u32,
    pub modulus: String,
    pub generator: String,
}

impl FieldFingerprint {
    pub fn of(tower: &Tower) -> Self {
        FieldFingerprint {
            p: tower.p(),
            m: tower.field.m(),
            q: tower.q(),
            d: tower.d(),
            modulus: tower.field.modulus_string(),
            generator: tower.field.generator_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: String,
    pub check: String,
    /// `None` for informational rows that do not affect the verdict.
    pub passed: Option<bool>,
    pub value: Value,
    pub expected: Value,
}

impl Check {
    pub fn new(
        suite: &str,
        check: impl Into<String>,
        passed: bool,
        value: impl Serialize,
        expected: impl Serialize,
    ) -> Self {
        Check {
            suite: suite.to_string(),
            check: check.into(),
            passed: Some(passed),
            value: serde_json::to_value(value).unwrap_or(Value::Null),
            expected: serde_json::to_value(expected).unwrap_or(Value::Null),
        }
    }

    pub fn info(suite: &str, check: impl Into<String>, value: impl Serialize, expected: impl Serialize) -> Self {
        Check { passed: None, ..Check::new(suite, check, true, value, expected) }
    }

    pub fn to_row(&self) -> Row {
        RowBuilder::new()
            .set("suite", &self.suite)
            .set("check", &self.check)
            .set("passed", self.passed)
            .set("value", &self.value)
            .set("expected", &self.expected)
            .build()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub passed: bool,
    pub checks: usize,
    pub failures: usize,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl Summary {
    pub fn from_checks(checks: &[Check]) -> Self {
        let failures = checks.iter().filter(|c| c.passed == Some(false)).count();
        Summary { passed: failures == 0, checks: checks.len(), failures, extra: Map::new() }
    }

    pub fn info(extra: Map<String, Value>) -> Self {
        Summary { passed: true, checks: 0, failures: 0, extra }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Envelope {
    pub schema: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: Value,
    pub field: FieldFingerprint,
    pub timestamp: u64,
    pub rows: Vec<Row>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<Summary>,
}

impl Envelope {
    pub fn new(
        command: &str,
        config: Value,
        field: FieldFingerprint,
        rows: Vec<Row>,
        summary: Option<Summary>,
    ) -> Self {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Envelope {
            schema: SCHEMA,
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config,
            field,
            timestamp,
            rows,
            summary,
        }
    }

    pub fn passed(&self) -> bool {
        self.summary.as_ref().is_none_or(|s| s.passed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let to_io = |e: csv::Error| Error::Io(e.into());
    if let Some(first) = rows.first() {
        w.write_record(first.keys()).map_err(to_io)?;
        for row in rows {
            w.write_record(row.values().map(scalar)).map_err(to_io)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn emit(env: &Envelope, format: Format, path: Option<&Path>) -> Result<()> {
    let mut buf: Vec<u8> = Vec::new();
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, env).map_err(|e| Error::Io(e.into()))?;
            buf.push(b'\n');
        }
        Format::Csv => write_csv(&env.rows, &mut buf)?,
    }
    match path {
        Some(p) => std::fs::write(p, buf)?,
        None => std::io::stdout().write_all(&buf)?,
    }
    Ok(())
}
