//! Run reports and their CSV, JSON and markdown renderings.

use std::time::Duration;

use parlab::CheckReport;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, OutputFormat};
use crate::error::CliResult;

/// The results of one (d, q, label) cell.
#[derive(Debug, Clone, Serialize)]
pub struct CaseResult {
    pub d: usize,
    /// None for results that span several fields, such as slope fits.
    pub q: Option<u32>,
    pub label: String,
    pub checks: Vec<CheckReport>,
    pub data: Value,
}

impl CaseResult {
    pub fn new(d: usize, q: Option<u32>, label: impl Into<String>) -> Self {
        CaseResult { d, q, label: label.into(), checks: Vec::new(), data: Value::Null }
    }

    pub fn ok(&self) -> bool {
        self.checks.iter().all(CheckReport::ok)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub cases: usize,
    pub checks: usize,
    pub failed: usize,
    /// "check [d=.. q=.. label]" for every failed enforced check, sorted.
    pub failed_checks: Vec<String>,
}

/// Rows for CSV output and the default markdown table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table { headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> CliResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!("| {} |\n", self.headers.join(" | "));
        out += &format!("|{}\n", "---|".repeat(self.headers.len()));
        for row in &self.rows {
            out += &format!("| {} |\n", row.join(" | "));
        }
        out
    }
}

fn csv_err(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e.to_string())
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub config: ExperimentConfig,
    /// Sorted by (d, q, label).
    pub cases: Vec<CaseResult>,
    pub summary: Summary,
    pub wall_clock: Duration,
    pub table: Table,
    /// Replaces the default markdown rendering when set.
    pub markdown: Option<String>,
}

impl RunReport {
    pub fn new(config: ExperimentConfig, mut cases: Vec<CaseResult>, table: Table, wall_clock: Duration) -> Self {
        cases.sort_by(|a, b| (a.d, a.q, &a.label).cmp(&(b.d, b.q, &b.label)));
        let mut failed_checks: Vec<String> = cases
            .iter()
            .flat_map(|c| {
                c.checks
                    .iter()
                    .filter(|r| !r.ok())
                    .map(move |r| format!("{} [d={} q={} {}]", r.check, c.d, q_label(c.q), c.label))
            })
            .collect();
        failed_checks.sort();
        let summary = Summary {
            cases: cases.len(),
            checks: cases.iter().map(|c| c.checks.len()).sum(),
            failed: failed_checks.len(),
            failed_checks,
        };
        RunReport { config, cases, summary, wall_clock, table, markdown: None }
    }

    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    /// Every enforced check that failed, by name.
    pub fn failed_check_names(&self) -> Vec<String> {
        let mut names: Vec<String> =
            self.cases.iter().flat_map(|c| c.checks.iter().filter(|r| !r.ok()).map(|r| r.check.clone())).collect();
        names.sort();
        names.dedup();
        names
    }

    /// The reproducible part of the report: everything except timing.
    pub fn payload(&self) -> Value {
        json!({
            "version": env!("CARGO_PKG_VERSION"),
            "config": self.config,
            "cases": self.cases,
            "summary": self.summary,
        })
    }

    pub fn to_json(&self) -> String {
        let mut value = self.payload();
        value["timing"] = json!({ "wall_clock_secs": self.wall_clock.as_secs_f64() });
        serde_json::to_string_pretty(&value).expect("reports always serialize")
    }

    pub fn to_markdown(&self) -> String {
        if let Some(md) = &self.markdown {
            return md.clone();
        }
        let status = if self.passed() { "pass" } else { "FAIL" };
        let mut out = format!(
            "# parlab {}\n\n{} cases, {} checks, {} failed: {status}\n\n",
            self.config.experiment.name(),
            self.summary.cases,
            self.summary.checks,
            self.summary.failed
        );
        out += &self.table.to_markdown();
        out
    }

    pub fn render(&self, format: OutputFormat) -> CliResult<String> {
        Ok(match format {
            OutputFormat::Csv => self.table.to_csv()?,
            OutputFormat::Json => self.to_json(),
            OutputFormat::Markdown => self.to_markdown(),
        })
    }
}

/// The default table: one row per check.
pub fn check_table(cases: &[CaseResult]) -> Table {
    let mut table = Table::new(&["d", "q", "case", "check", "params", "lhs", "rhs", "ratio", "pass", "asserted"]);
    let mut rows: Vec<(&CaseResult, &CheckReport)> =
        cases.iter().flat_map(|c| c.checks.iter().map(move |r| (c, r))).collect();
    rows.sort_by(|(a, _), (b, _)| (a.d, a.q, &a.label).cmp(&(b.d, b.q, &b.label)));
    for (c, r) in rows {
        let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        table.push(vec![
            c.d.to_string(),
            q_label(c.q),
            c.label.clone(),
            r.check.clone(),
            params.join(" "),
            format!("{:e}", r.lhs),
            format!("{:e}", r.rhs),
            format!("{:e}", r.ratio),
            r.pass.to_string(),
            r.asserted.to_string(),
        ]);
    }
    table
}

fn q_label(q: Option<u32>) -> String {
    q.map_or_else(|| "all".to_string(), |q| q.to_string())
}
