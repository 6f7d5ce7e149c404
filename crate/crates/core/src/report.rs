//! Check records and their text and JSON renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::geometry::Scene;

pub const TOOL: &str = "projbound";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNDETERMINED: i32 = 3;

/// Outcome class of a record. `Info` records carry results that are neither
/// a pass nor a failure (a verdict about the geometry, a table).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Info,
    Undetermined,
    Fail,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Info => "INFO",
            Status::Undetermined => "UNDETERMINED",
            Status::Fail => "FAIL",
        }
    }

    pub fn from_zero(v: &crate::ZeroVerdict) -> Status {
        if v.is_zero() {
            Status::Pass
        } else if v.is_nonzero() {
            Status::Fail
        } else {
            Status::Undetermined
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub check: String,
    /// The statement the check tests, in words.
    pub anchor: String,
    pub inputs: BTreeMap<String, Value>,
    pub status: Status,
    pub outcome: String,
    pub residuals: BTreeMap<String, f64>,
    pub witnesses: Vec<Value>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl Record {
    pub fn new(check: &str, anchor: &str) -> Record {
        Record {
            check: check.to_string(),
            anchor: anchor.to_string(),
            inputs: BTreeMap::new(),
            status: Status::Info,
            outcome: String::new(),
            residuals: BTreeMap::new(),
            witnesses: Vec::new(),
            details: Value::Null,
        }
    }

    pub fn input(mut self, key: &str, value: impl Serialize) -> Record {
        self.inputs.insert(key.to_string(), to_value(value));
        self
    }

    pub fn status(mut self, status: Status) -> Record {
        self.status = status;
        self
    }

    pub fn outcome(mut self, outcome: impl Into<String>) -> Record {
        self.outcome = outcome.into();
        self
    }

    pub fn residual(mut self, key: &str, value: f64) -> Record {
        self.residuals.insert(key.to_string(), value);
        self
    }

    pub fn witness(mut self, value: impl Serialize) -> Record {
        self.witnesses.push(to_value(value));
        self
    }

    pub fn details(mut self, value: impl Serialize) -> Record {
        self.details = to_value(value);
        self
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report values serialise")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub scene_hash: Option<String>,
    pub seed: u64,
    pub records: Vec<Record>,
    pub tables: Vec<Table>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

impl Report {
    pub fn new(command: &str, scene: Option<&Scene>, seed: u64) -> Report {
        Report {
            tool: TOOL.to_string(),
            version: VERSION.to_string(),
            command: command.to_string(),
            scene_hash: scene.map(Scene::hash),
            seed,
            records: Vec::new(),
            tables: Vec::new(),
        }
    }

    pub fn push(&mut self, record: Record) {
        self.records.push(record);
    }

    pub fn record(&self, check: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.check == check)
    }

    /// 1 if any check failed, otherwise 3 if any is undetermined, otherwise 0.
    pub fn exit_code(&self) -> i32 {
        let worst = self.records.iter().map(|r| r.status).max().unwrap_or(Status::Pass);
        match worst {
            Status::Fail => EXIT_FAIL,
            Status::Undetermined => EXIT_UNDETERMINED,
            Status::Pass | Status::Info => EXIT_PASS,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Text => self.to_text(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{} {}  {}", self.tool, self.version, self.command);
        if let Some(h) = &self.scene_hash {
            let _ = write!(out, "  scene sha256:{}", &h[..16]);
        }
        let _ = writeln!(out, "  seed {}", self.seed);
        for r in &self.records {
            let _ = writeln!(out, "[{}] {}: {}", r.status.label(), r.check, r.outcome);
            let _ = writeln!(out, "    {}", r.anchor);
            if !r.inputs.is_empty() {
                let _ = writeln!(out, "    inputs: {}", join(r.inputs.iter().map(|(k, v)| format!("{k}={}", compact(v)))));
            }
            if !r.residuals.is_empty() {
                let _ = writeln!(out, "    residuals: {}", join(r.residuals.iter().map(|(k, v)| format!("{k}={}", num(*v)))));
            }
            for w in &r.witnesses {
                let _ = writeln!(out, "    witness: {}", compact(w));
            }
            if let Some(lines) = detail_lines(&r.details) {
                for l in lines {
                    let _ = writeln!(out, "    {l}");
                }
            }
        }
        for t in &self.tables {
            let _ = writeln!(out, "table {} ({} rows)", t.name, t.rows.len());
            let _ = writeln!(out, "{}", t.columns.iter().map(|c| format!("{c:>20}")).collect::<String>());
            for row in &t.rows {
                let _ = writeln!(out, "{}", row.iter().map(|v| format!("{v:>20.12e}")).collect::<String>());
            }
        }
        out
    }
}

fn join(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(" ")
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.as_f64().map(num).unwrap_or_else(|| n.to_string()),
        other => other.to_string(),
    }
}

fn num(v: f64) -> String {
    if v == 0.0 || v.is_nan() || v.is_infinite() || (1e-3..1e6).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:.6e}")
    }
}

/// Object-valued details render one key per line; other shapes are left to JSON.
fn detail_lines(details: &Value) -> Option<Vec<String>> {
    let Value::Object(map) = details else { return None };
    Some(
        map.iter()
            .map(|(k, v)| match v {
                Value::Array(items) if items.iter().all(|i| i.is_string()) => {
                    format!("{k}: [{}]", items.iter().map(compact).collect::<Vec<_>>().join(", "))
                }
                _ => format!("{k}: {}", compact(v)),
            })
            .collect(),
    )
}
