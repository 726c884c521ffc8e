//! Metric reports and their CSV, JSON and Markdown renderings.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use hspan_core::metrics::{FrScores, RrScores};
use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Rr,
    Fr,
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rr" => Ok(Protocol::Rr),
            "fr" => Ok(Protocol::Fr),
            other => Err(Error::Invalid(format!("unknown protocol '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scores {
    Rr(RrScores),
    Fr(FrScores),
}

impl Scores {
    /// Metric values in report column order.
    pub fn values(&self) -> Vec<f64> {
        match self {
            Scores::Rr(s) => vec![s.ergas, s.sam_deg, s.scc, s.q_avg],
            Scores::Fr(s) => vec![s.d_lambda, s.d_s, s.qnr],
        }
    }
}

/// Column key, Markdown header and whether larger is better.
pub fn columns(protocol: Protocol) -> &'static [(&'static str, &'static str, bool)] {
    match protocol {
        Protocol::Rr => &[("ergas", "ERGAS ↓", false), ("sam_deg", "SAM ↓", false), ("scc", "SCC ↑", true), ("q_avg", "q_avg ↑", true)],
        Protocol::Fr => &[("d_lambda", "D_λ ↓", false), ("d_s", "D_s ↓", false), ("qnr", "QNR ↑", true)],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub protocol: Protocol,
    pub ratio: usize,
    pub nyquist_gain: f64,
    pub kernel_size: usize,
    pub h_over_l: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub tile: String,
    pub method: String,
    pub scores: Scores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub tile: String,
    pub method: String,
    pub error: String,
}

pub const AGGREGATE_TILE: &str = "mean";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub params: ReportParams,
    pub rows: Vec<Row>,
    /// One row per method with `tile == "mean"`.
    pub aggregates: Vec<Row>,
    pub failures: Vec<Failure>,
}

impl MetricReport {
    /// Builds the report, averaging each method's rows in the given order.
    pub fn new(params: ReportParams, rows: Vec<Row>, failures: Vec<Failure>, methods: &[String]) -> Self {
        let aggregates = methods
            .iter()
            .filter_map(|m| aggregate(&params, m, rows.iter().filter(|r| &r.method == m)))
            .collect();
        Self { params, rows, aggregates, failures }
    }
}

fn aggregate<'a>(params: &ReportParams, method: &str, rows: impl Iterator<Item = &'a Row>) -> Option<Row> {
    let mut sums: Vec<f64> = Vec::new();
    let mut n = 0usize;
    for row in rows {
        let values = row.scores.values();
        if sums.is_empty() {
            sums = vec![0.0; values.len()];
        }
        for (s, v) in sums.iter_mut().zip(values) {
            *s += v;
        }
        n += 1;
    }
    if n == 0 {
        return None;
    }
    let m: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
    let scores = match params.protocol {
        Protocol::Rr => Scores::Rr(RrScores { ergas: m[0], sam_deg: m[1], scc: m[2], q_avg: m[3] }),
        Protocol::Fr => Scores::Fr(FrScores { d_lambda: m[0], d_s: m[1], qnr: m[2], alpha: params.alpha, beta: params.beta }),
    };
    Some(Row { tile: AGGREGATE_TILE.into(), method: method.into(), scores })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Md,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "md" | "markdown" => Ok(Format::Md),
            other => Err(Error::Invalid(format!("unknown report format '{other}'"))),
        }
    }
}

pub fn to_csv(report: &MetricReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["method", "tile"];
    header.extend(columns(report.params.protocol).iter().map(|c| c.0));
    w.write_record(&header)?;
    for row in report.rows.iter().chain(&report.aggregates) {
        let mut record = vec![row.method.clone(), row.tile.clone()];
        record.extend(row.scores.values().iter().map(|v| format!("{v:.6}")));
        w.write_record(&record)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Invalid(e.to_string()))
}

pub fn to_json(report: &MetricReport) -> Result<String> {
    serde_json::to_string_pretty(report).map(|s| s + "\n").map_err(|e| Error::Invalid(e.to_string()))
}

/// Aggregate table; per column the best value is bold and the second best
/// underlined.
pub fn to_markdown(report: &MetricReport) -> String {
    let cols = columns(report.params.protocol);
    let mut out = String::from("| Method |");
    for (_, header, _) in cols {
        let _ = write!(out, " {header} |");
    }
    out.push_str("\n|---|");
    out.push_str(&"---:|".repeat(cols.len()));
    out.push('\n');

    let table: Vec<Vec<f64>> = report.aggregates.iter().map(|r| r.scores.values()).collect();
    let ranks: Vec<(Option<f64>, Option<f64>)> = cols
        .iter()
        .enumerate()
        .map(|(c, &(_, _, higher))| {
            let mut distinct: Vec<f64> = table.iter().map(|v| round4(v[c])).collect();
            distinct.sort_by(|a, b| if higher { b.total_cmp(a) } else { a.total_cmp(b) });
            distinct.dedup();
            (distinct.first().copied(), distinct.get(1).copied())
        })
        .collect();
    for (row, values) in report.aggregates.iter().zip(&table) {
        let _ = write!(out, "| {} |", row.method);
        for (c, v) in values.iter().enumerate() {
            let shown = round4(*v);
            let text = format!("{shown:.4}");
            let cell = if Some(shown) == ranks[c].0 {
                format!("**{text}**")
            } else if Some(shown) == ranks[c].1 {
                format!("<u>{text}</u>")
            } else {
                text
            };
            let _ = write!(out, " {cell} |");
        }
        out.push('\n');
    }
    if !report.failures.is_empty() {
        out.push_str("\nFailed tiles:\n\n");
        for f in &report.failures {
            let _ = writeln!(out, "- {} / {}: {}", f.tile, f.method, f.error);
        }
    }
    out
}

/// Ranks on the printed precision so visually equal values tie.
fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

pub fn render(report: &MetricReport, format: Format) -> Result<String> {
    match format {
        Format::Csv => to_csv(report),
        Format::Json => to_json(report),
        Format::Md => Ok(to_markdown(report)),
    }
}

pub fn emit(report: &MetricReport, format: Format, path: &Path) -> Result<()> {
    if report.rows.is_empty() && report.failures.is_empty() {
        return Err(Error::Invalid("empty report".into()));
    }
    fs::write(path, render(report, format)?).at(path)
}
