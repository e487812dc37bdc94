//! Machine-readable experiment reports and their JSON/CSV emission.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sunflower_core::check::BoundCheck;
use sunflower_core::probability::ProbabilityRecord;

use crate::config::ExperimentConfig;

pub const TOOL: &str = "sunflower-lab";

/// Whether a row gates the exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// A finite inequality or identity that must hold at these parameters.
    Asserted,
    /// A quantity recorded for inspection; its bound is asymptotic or vacuous here.
    ReportOnly,
    /// A consistency check of the harness itself.
    Plumbing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Report,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub kind: CheckKind,
    pub value: f64,
    /// The exact rational value, when one was computed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    pub status: Status,
}

impl CheckRow {
    /// An asserted row with a pass/fail verdict.
    pub fn asserted(name: impl Into<String>, value: f64, bound: Option<f64>, holds: bool) -> Self {
        Self {
            name: name.into(),
            kind: CheckKind::Asserted,
            value,
            exact: None,
            bound,
            half_width: None,
            confidence: None,
            status: if holds { Status::Pass } else { Status::Fail },
        }
    }

    /// A row that never affects the exit code.
    pub fn report(name: impl Into<String>, value: f64, bound: Option<f64>) -> Self {
        Self {
            kind: CheckKind::ReportOnly,
            status: Status::Report,
            ..Self::asserted(name, value, bound, true)
        }
    }

    pub fn plumbing(name: impl Into<String>, holds: bool) -> Self {
        Self {
            kind: CheckKind::Plumbing,
            ..Self::asserted(name, if holds { 1.0 } else { 0.0 }, Some(1.0), holds)
        }
    }

    /// Copies value, exact form, half width and confidence from a record.
    pub fn with_record(mut self, record: &ProbabilityRecord) -> Self {
        self.value = record.value();
        match record {
            ProbabilityRecord::Exact(p) => self.exact = Some(p.value.to_string()),
            ProbabilityRecord::MonteCarlo(e) => {
                self.half_width = Some(e.half_width);
                self.confidence = Some(e.confidence);
            }
        }
        self
    }

    /// A bound check becomes asserted when its bound says something at these
    /// parameters, and report-only otherwise.
    pub fn from_bound(name: impl Into<String>, check: &BoundCheck) -> Self {
        let row = if check.meaningful {
            Self::asserted(name, 0.0, Some(check.bound), check.holds)
        } else {
            Self::report(name, 0.0, Some(check.bound))
        };
        row.with_record(&check.value)
    }

    pub fn is_failure(&self) -> bool {
        self.kind != CheckKind::ReportOnly && self.status == Status::Fail
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub checks: Vec<CheckRow>,
    pub details: serde_json::Value,
    pub wall_clock_ms: u64,
}

impl Report {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: config.command.to_string(),
            config,
            checks: Vec::new(),
            details: serde_json::Value::Null,
            wall_clock_ms: 0,
        }
    }

    pub fn push(&mut self, row: CheckRow) {
        self.checks.push(row);
    }

    /// True when no asserted or plumbing row failed.
    pub fn passed(&self) -> bool {
        !self.checks.iter().any(CheckRow::is_failure)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// JSON with the wall-clock field zeroed, for run-to-run comparison.
    pub fn canonical_json(&self) -> String {
        Self {
            wall_clock_ms: 0,
            ..self.clone()
        }
        .to_json()
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// One line per check under a fixed header.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(CSV_HEADER).expect("in-memory write");
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for row in &self.checks {
            let kind = serde_json::to_value(row.kind).expect("kind serializes");
            let status = serde_json::to_value(row.status).expect("status serializes");
            writer
                .write_record([
                    self.command.as_str(),
                    row.name.as_str(),
                    kind.as_str().unwrap_or_default(),
                    &row.value.to_string(),
                    row.exact.as_deref().unwrap_or_default(),
                    &opt(row.bound),
                    &opt(row.half_width),
                    &opt(row.confidence),
                    status.as_str().unwrap_or_default(),
                ])
                .expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

pub const CSV_HEADER: [&str; 9] = [
    "command",
    "name",
    "kind",
    "value",
    "exact",
    "bound",
    "half_width",
    "confidence",
    "status",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    /// CSV for a `.csv` path, JSON otherwise.
    pub fn for_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Json,
        }
    }
}

/// Writes the report, creating parent directories as needed.
pub fn emit(report: &Report, format: Format, path: &Path) -> io::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let text = match format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    fs::write(path, text)
}
