//! Check reports and their JSON / CSV serialization.
//!
//! Output is bit-stable: JSON objects have sorted keys, integers are written
//! in decimal, and every file ends with a single LF.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of counterexamples kept in a report.
pub const DEFAULT_COUNTEREXAMPLE_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub n: u64,
    pub details: String,
}

/// Outcome of one finite-range verification.
///
/// `passed` holds exactly when `counterexamples` is empty. The list is capped;
/// `failure_count` is the uncapped total.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_name: String,
    pub params: BTreeMap<String, i64>,
    pub range: (u64, u64),
    pub passed: bool,
    pub counterexamples: Vec<Counterexample>,
    pub failure_count: u64,
    pub stats: BTreeMap<String, u64>,
    pub notes: BTreeMap<String, String>,
}

impl CheckReport {
    pub fn stat(&self, key: &str) -> u64 {
        self.stats.get(key).copied().unwrap_or(0)
    }

    /// One-line human summary.
    pub fn summary_line(&self) -> String {
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!(
            "{} [{}] n in {}..={}: {} ({} failures)",
            self.check_name,
            params.join(" "),
            self.range.0,
            self.range.1,
            if self.passed { "PASS" } else { "FAIL" },
            self.failure_count
        )
    }
}

/// Accumulates a [`CheckReport`].
#[derive(Debug)]
pub struct ReportBuilder {
    report: CheckReport,
    limit: usize,
}

impl ReportBuilder {
    pub fn new(check_name: impl Into<String>, range: (u64, u64), limit: usize) -> Self {
        ReportBuilder {
            report: CheckReport {
                check_name: check_name.into(),
                params: BTreeMap::new(),
                range,
                passed: true,
                counterexamples: Vec::new(),
                failure_count: 0,
                stats: BTreeMap::new(),
                notes: BTreeMap::new(),
            },
            limit: limit.max(1),
        }
    }

    pub fn param(mut self, key: &str, value: impl TryInto<i64>) -> Self {
        let value = value.try_into().unwrap_or(i64::MAX);
        self.report.params.insert(key.to_string(), value);
        self
    }

    pub fn fail(&mut self, n: u64, details: impl fmt::Display) {
        self.report.failure_count += 1;
        if self.report.counterexamples.len() < self.limit {
            self.report.counterexamples.push(Counterexample {
                n,
                details: details.to_string(),
            });
        }
    }

    /// Record a failure unless `ok`.
    pub fn check(&mut self, ok: bool, n: u64, details: impl FnOnce() -> String) {
        if !ok {
            self.fail(n, details());
        }
    }

    pub fn bump(&mut self, key: impl Into<String>) {
        *self.report.stats.entry(key.into()).or_insert(0) += 1;
    }

    pub fn set_stat(&mut self, key: impl Into<String>, value: u64) {
        self.report.stats.insert(key.into(), value);
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        self.report.notes.insert(key.into(), value.to_string());
    }

    pub fn finish(mut self) -> CheckReport {
        self.report.passed = self.report.failure_count == 0;
        self.report
    }
}

/// Output format of [`export`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::ParameterOutOfRange(format!("unknown format {other:?}"))),
        }
    }
}

/// Something that can be written by [`export`].
pub trait Exportable {
    fn to_json(&self) -> Result<String>;
    fn to_csv(&self) -> Result<String>;

    fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Serialize with sorted object keys, pretty-printed, LF-terminated.
pub fn stable_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    // `serde_json::Value` maps are ordered by key.
    let tree = serde_json::to_value(value)?;
    let mut text = serde_json::to_string_pretty(&tree)?;
    text.push('\n');
    Ok(text)
}

/// Build CSV text from a header and rows.
pub fn csv_text<I, R>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Io {
        path: "<csv buffer>".into(),
        source: e.into_error(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

impl Exportable for CheckReport {
    fn to_json(&self) -> Result<String> {
        stable_json(self)
    }

    /// Columns `kind,n,details`: one row per kept counterexample, then a
    /// summary row whose details list `key=value` pairs separated by `;`.
    fn to_csv(&self) -> Result<String> {
        let mut summary = vec![
            format!("check={}", self.check_name),
            format!("passed={}", self.passed),
            format!("failures={}", self.failure_count),
            format!("range={}..={}", self.range.0, self.range.1),
        ];
        summary.extend(self.params.iter().map(|(k, v)| format!("param.{k}={v}")));
        summary.extend(self.stats.iter().map(|(k, v)| format!("stat.{k}={v}")));
        summary.extend(self.notes.iter().map(|(k, v)| format!("note.{k}={v}")));
        let mut rows: Vec<Vec<String>> = self
            .counterexamples
            .iter()
            .map(|c| vec!["counterexample".to_string(), c.n.to_string(), c.details.clone()])
            .collect();
        rows.push(vec!["summary".into(), String::new(), summary.join(";")]);
        csv_text(&["kind", "n", "details"], rows)
    }
}

impl Exportable for crate::series::TruncatedSeries {
    fn to_json(&self) -> Result<String> {
        stable_json(self)
    }

    /// Columns `n,coeff`; the ring is not repeated per row.
    fn to_csv(&self) -> Result<String> {
        let rows = self.coeffs().iter().enumerate().map(|(n, c)| [n.to_string(), c.to_string()]);
        csv_text(&["n", "coeff"], rows)
    }
}

/// Write `report` to `destination` in the given format.
pub fn export(report: &dyn Exportable, format: Format, destination: &Path) -> Result<()> {
    let text = report.render(format)?;
    if let Some(parent) = destination.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| Error::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::write(destination, text).map_err(|source| Error::Io {
        path: destination.to_path_buf(),
        source,
    })
}
