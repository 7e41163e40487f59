//! Oracle comparisons and their CSV form.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::format::fmt_f64;

/// Default two-sided z threshold.
pub const DEFAULT_THRESHOLD: f64 = 4.0;

/// Relative floor on the standard error used in z-scores, so that
/// observables without sampling noise are compared exactly.
const STDERR_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Check {
    /// Pass iff `|z| ≤ threshold`.
    TwoSided { threshold: f64 },
    /// Pass iff `estimate ≤ oracle`; the oracle is an upper bound.
    AtMost,
    /// Reported for reference; always passes.
    Informational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub observable: String,
    pub s: Option<f64>,
    pub t: Option<f64>,
    pub estimate: f64,
    pub stderr: f64,
    pub oracle: f64,
    pub z: f64,
    pub check: Check,
    pub pass: bool,
}

/// `(estimate − oracle)/stderr`, with the stderr floored at
/// `1e−10·max(1, |oracle|)`.
pub fn z_score(estimate: f64, stderr: f64, oracle: f64) -> f64 {
    let floor = STDERR_FLOOR * oracle.abs().max(1.0);
    (estimate - oracle) / stderr.max(floor)
}

impl ComparisonReport {
    fn build(
        observable: impl Into<String>,
        s: Option<f64>,
        t: Option<f64>,
        estimate: f64,
        stderr: f64,
        oracle: f64,
        check: Check,
    ) -> Self {
        let mut r = ComparisonReport {
            observable: observable.into(),
            s,
            t,
            estimate,
            stderr,
            oracle,
            z: z_score(estimate, stderr, oracle),
            check,
            pass: false,
        };
        r.pass = r.evaluate();
        r
    }

    pub fn z_test(
        observable: impl Into<String>,
        s: Option<f64>,
        t: Option<f64>,
        estimate: f64,
        stderr: f64,
        oracle: f64,
        threshold: f64,
    ) -> Self {
        Self::build(observable, s, t, estimate, stderr, oracle, Check::TwoSided { threshold })
    }

    pub fn at_most(
        observable: impl Into<String>,
        s: Option<f64>,
        t: Option<f64>,
        estimate: f64,
        stderr: f64,
        bound: f64,
    ) -> Self {
        Self::build(observable, s, t, estimate, stderr, bound, Check::AtMost)
    }

    pub fn informational(
        observable: impl Into<String>,
        s: Option<f64>,
        t: Option<f64>,
        estimate: f64,
        stderr: f64,
        oracle: f64,
    ) -> Self {
        Self::build(observable, s, t, estimate, stderr, oracle, Check::Informational)
    }

    /// Pass flag recomputed from `(estimate, stderr, oracle, check)` alone.
    pub fn evaluate(&self) -> bool {
        match self.check {
            Check::TwoSided { threshold } => {
                z_score(self.estimate, self.stderr, self.oracle).abs() <= threshold
            }
            Check::AtMost => self.estimate <= self.oracle,
            Check::Informational => true,
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub const REPORT_HEADER: [&str; 8] = ["observable", "s", "t", "estimate", "stderr", "oracle", "z", "pass"];

/// Writes `observable,s,t,estimate,stderr,oracle,z,pass` rows.
pub fn write_reports_csv<W: Write>(out: W, reports: &[ComparisonReport]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(REPORT_HEADER)?;
    for r in reports {
        w.write_record([
            r.observable.clone(),
            opt(r.s),
            opt(r.t),
            fmt_f64(r.estimate),
            fmt_f64(r.stderr),
            fmt_f64(r.oracle),
            fmt_f64(r.z),
            r.pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Row of a report CSV as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub observable: String,
    pub s: Option<f64>,
    pub t: Option<f64>,
    pub estimate: f64,
    pub stderr: f64,
    pub oracle: f64,
    pub z: f64,
    pub pass: bool,
}

fn parse_opt(field: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    parse(field).map(Some)
}

fn parse(field: &str) -> Result<f64> {
    field
        .parse()
        .map_err(|_| invalid(format!("not a number: {field:?}")))
}

pub fn read_reports_csv<R: Read>(input: R) -> Result<Vec<ReportRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != REPORT_HEADER {
        return Err(invalid(format!("unexpected report header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        rows.push(ReportRow {
            observable: rec[0].to_string(),
            s: parse_opt(&rec[1])?,
            t: parse_opt(&rec[2])?,
            estimate: parse(&rec[3])?,
            stderr: parse(&rec[4])?,
            oracle: parse(&rec[5])?,
            z: parse(&rec[6])?,
            pass: match &rec[7] {
                "true" => true,
                "false" => false,
                other => return Err(invalid(format!("bad pass flag {other:?}"))),
            },
        });
    }
    Ok(rows)
}
