//! Deterministic result reports in text and structured (JSON) form.
//!
//! Reports are value types assembled by the CLI commands and rendered at
//! the very end.  Both renderings are deterministic: identical inputs,
//! flags and seed produce byte-identical output, because
//!
//! * every keyed collection is a `BTreeMap` (stable iteration order),
//! * numbers are formatted through one shared function ([`fmt_num`],
//!   shortest round-trip representation) in *both* renderings, so the text
//!   report contains exactly the same digit strings as the JSON report,
//! * no timestamps, hostnames or other ambient state are recorded — the
//!   only environment the report captures is the tool version.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::structures::ClassificationReport;

/// Output format selector (`--format`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// Human-readable text.
    Text,
    /// Pretty-printed JSON with a stable field order.
    Structured,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "structured" | "json" => Ok(ReportFormat::Structured),
            other => Err(format!(
                "unknown format {other:?}; expected \"text\" or \"structured\""
            )),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Text => "text",
            ReportFormat::Structured => "structured",
        })
    }
}

/// Format a float exactly as the structured rendering does (shortest
/// round-trip form), so both renderings carry identical digit strings.
pub fn fmt_num(v: f64) -> String {
    serde_json::to_string(&v).unwrap_or_else(|_| "null".to_owned())
}

/// Rank information for one classified pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankData {
    /// n with chart dimension 2n+1.
    pub n: usize,
    /// Detected half-rank.
    pub half_rank: usize,
    /// Whether the pair is regular (half-rank = n).
    pub regular: bool,
}

/// One tabulated sample: a point and named values at it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    /// Coordinate values of the point.
    pub point: Vec<f64>,
    /// Named numbers evaluated there.
    pub values: BTreeMap<String, f64>,
}

/// A complete command result.
///
/// Assemble by mutating the public fields (or via
/// [`Report::absorb_classification`]), then render with
/// [`Report::render`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    /// Always `"oddform"`.
    pub tool: String,
    /// Crate version, for reproducibility.
    pub version: String,
    /// The command that produced the report.
    pub command: String,
    /// Payload kind the command operated on.
    pub payload: String,
    /// Sampler seed.
    pub seed: u64,
    /// Number of admissible sample points.
    pub count: usize,
    /// Tolerance every verdict used.
    pub tol: f64,
    /// Structure labels granted, sorted.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
    /// Rank data per classified pair.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub ranks: BTreeMap<String, RankData>,
    /// Identity name → max relative residual (should be ≤ tol).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub residuals: BTreeMap<String, f64>,
    /// Witness name → min magnitude over samples (should be > tol).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub nonvanishing: BTreeMap<String, f64>,
    /// Symbolic results rendered as expression text (bracket command).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub expressions: BTreeMap<String, String>,
    /// Tabulated per-point values (bracket samples, dual tensors).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<SampleRow>,
    /// Free-form remarks.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// `"ok"`, `"mismatch"` or `"failed"`; the CLI maps this to the exit
    /// code.
    pub status: String,
}

impl Report {
    /// Start a report for `command` on `payload` with the given sampler
    /// parameters.
    pub fn new(command: &str, payload: &str, seed: u64, count: usize, tol: f64) -> Self {
        Report {
            tool: "oddform".to_owned(),
            version: crate::VERSION.to_owned(),
            command: command.to_owned(),
            payload: payload.to_owned(),
            seed,
            count,
            tol,
            labels: Vec::new(),
            ranks: BTreeMap::new(),
            residuals: BTreeMap::new(),
            nonvanishing: BTreeMap::new(),
            expressions: BTreeMap::new(),
            samples: Vec::new(),
            notes: Vec::new(),
            status: "ok".to_owned(),
        }
    }

    /// Merge a classification verdict.  `section` names the pair when a
    /// command classifies more than one (e.g. `"covariant"`); keys of the
    /// residual tables are prefixed with it.
    pub fn absorb_classification(&mut self, section: &str, c: &ClassificationReport) {
        for label in &c.labels {
            let name = label.to_string();
            if !self.labels.contains(&name) {
                self.labels.push(name);
            }
        }
        self.labels.sort();
        let prefix = if section.is_empty() {
            String::new()
        } else {
            format!("{section}: ")
        };
        for (k, v) in &c.residuals {
            self.residuals.insert(format!("{prefix}{k}"), *v);
        }
        for (k, v) in &c.nonvanishing {
            self.nonvanishing.insert(format!("{prefix}{k}"), *v);
        }
        let rank_key = if section.is_empty() { "pair" } else { section };
        self.ranks.insert(
            rank_key.to_owned(),
            RankData {
                n: c.n,
                half_rank: c.half_rank,
                regular: c.regular,
            },
        );
        for note in &c.notes {
            let note = if section.is_empty() {
                note.clone()
            } else {
                format!("{section}: {note}")
            };
            if !self.notes.contains(&note) {
                self.notes.push(note);
            }
        }
    }

    /// Render in the requested format.  Both renderings end with a newline
    /// and contain the same numbers digit for digit.
    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Text => self.render_text(),
            ReportFormat::Structured => self.render_structured(),
        }
    }

    /// Pretty-printed JSON with stable key order.
    pub fn render_structured(&self) -> String {
        let mut out = serde_json::to_string_pretty(self)
            .expect("report serialization cannot fail");
        out.push('\n');
        out
    }

    /// Human-readable text.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let push = |out: &mut String, line: String| {
            out.push_str(&line);
            out.push('\n');
        };
        push(
            &mut out,
            format!("{} {} — {}", self.tool, self.version, self.command),
        );
        push(&mut out, format!("payload: {}", self.payload));
        push(
            &mut out,
            format!(
                "sampler: seed={} count={} tol={}",
                self.seed,
                self.count,
                fmt_num(self.tol)
            ),
        );
        if !self.labels.is_empty() {
            push(&mut out, format!("labels: {}", self.labels.join(", ")));
        }
        for (name, rank) in &self.ranks {
            push(
                &mut out,
                format!(
                    "rank[{name}]: n={} half_rank={} regular={}",
                    rank.n, rank.half_rank, rank.regular
                ),
            );
        }
        let table = |out: &mut String, title: &str, map: &BTreeMap<String, f64>| {
            if map.is_empty() {
                return;
            }
            out.push_str(title);
            out.push_str(":\n");
            let width = map.keys().map(|k| k.len()).max().unwrap_or(0);
            for (k, v) in map {
                out.push_str(&format!("  {k:width$}  {}\n", fmt_num(*v)));
            }
        };
        table(&mut out, "residuals", &self.residuals);
        table(&mut out, "nonvanishing", &self.nonvanishing);
        if !self.expressions.is_empty() {
            out.push_str("expressions:\n");
            for (k, v) in &self.expressions {
                push(&mut out, format!("  {k} = {v}"));
            }
        }
        if !self.samples.is_empty() {
            out.push_str("samples:\n");
            for row in &self.samples {
                let point = row
                    .point
                    .iter()
                    .map(|v| fmt_num(*v))
                    .collect::<Vec<_>>()
                    .join(", ");
                let values = row
                    .values
                    .iter()
                    .map(|(k, v)| format!("{k}={}", fmt_num(*v)))
                    .collect::<Vec<_>>()
                    .join(" ");
                push(&mut out, format!("  ({point}): {values}"));
            }
        }
        if !self.notes.is_empty() {
            out.push_str("notes:\n");
            for note in &self.notes {
                push(&mut out, format!("  - {note}"));
            }
        }
        push(&mut out, format!("status: {}", self.status));
        out
    }
}
