//! Tabular reports.
//!
//! CSV is the interchange format: LF line endings, reals as `{:.16e}`
//! (17 significant digits), verdicts as `pass`/`fail`, missing values empty.
//! The pretty format is for terminals and carries no stability promise.

use std::fmt::Write as _;

use crate::extension::{GeneratorErrorReport, JointLawReport, StitchReport};
use crate::kernel::GammaProfile;
use crate::reconstruction::{DisagreementTable, DominationReport};
use crate::stats::AuditReport;
use crate::vershik::AlphaTable;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
    Verdict(bool),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Verdict(true) => "pass".into(),
            Cell::Verdict(false) => "fail".into(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Real)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Verdict(v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Column whose `fail` entries name a failed row, if any.
    pub key: Option<&'static str>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
            key: None,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    /// Rows whose `verdict` cell is `fail`, described by their first cell.
    pub fn failures(&self) -> Vec<String> {
        let Some(v) = self.columns.iter().position(|c| *c == "verdict") else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter(|r| r[v] == Cell::Verdict(false))
            .map(|r| format!("{}={}", self.columns[0], r[0].render()))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Pretty,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn emit_report(table: &Table, format: Format) -> String {
    let rendered: Vec<Vec<String>> = table.rows.iter().map(|r| r.iter().map(Cell::render).collect()).collect();
    let mut out = String::new();
    match format {
        Format::Csv => {
            let header: Vec<String> = table.columns.iter().map(|c| csv_field(c)).collect();
            out.push_str(&header.join(","));
            out.push('\n');
            for row in &rendered {
                let fields: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
                out.push_str(&fields.join(","));
                out.push('\n');
            }
        }
        Format::Pretty => {
            let mut widths: Vec<usize> = table.columns.iter().map(|c| c.len()).collect();
            for row in &rendered {
                for (w, f) in widths.iter_mut().zip(row) {
                    *w = (*w).max(f.len());
                }
            }
            let line = |cells: Vec<&str>, out: &mut String| {
                let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
                let _ = writeln!(out, "{}", padded.join("  ").trim_end());
            };
            line(table.columns.clone(), &mut out);
            for row in &rendered {
                line(row.iter().map(String::as_str).collect(), &mut out);
            }
        }
    }
    out
}

pub fn gamma_table(profile: &GammaProfile) -> Table {
    let mut t = Table::new(vec!["p", "gamma_p", "certified"]);
    for (p, (g, c)) in profile.values.iter().zip(&profile.certified).enumerate() {
        t.push(vec![p.into(), (*g).into(), c.as_str().into()]);
    }
    t
}

pub fn audit_table(report: &AuditReport) -> Table {
    let mut t = Table::new(vec!["statistic", "value", "threshold", "verdict"]);
    for r in &report.rows {
        t.push(vec![r.statistic.as_str().into(), r.value.into(), r.threshold.into(), r.pass.into()]);
    }
    t
}

pub fn disagreement_table(table: &DisagreementTable) -> Table {
    let mut t = Table::new(vec!["N", "K", "trials", "freq", "stderr", "dp_bound", "verdict"]);
    for r in &table.rows {
        t.push(vec![
            r.n.into(),
            r.k.into(),
            r.trials.into(),
            r.freq.into(),
            r.stderr.into(),
            r.dp_bound.into(),
            r.pass.into(),
        ]);
    }
    t
}

pub fn domination_tail_table(report: &DominationReport) -> Table {
    let mut t = Table::new(vec!["M", "mc", "stderr", "exact", "verdict"]);
    for r in &report.tail {
        t.push(vec![r.m.into(), r.mc.into(), r.stderr.into(), r.exact.into(), r.pass.into()]);
    }
    t
}

pub fn domination_step_table(report: &DominationReport) -> Table {
    let mut t = Table::new(vec!["l", "count", "freq", "stderr", "bound", "verdict"]);
    for r in &report.steps {
        t.push(vec![
            r.l.into(),
            r.count.into(),
            r.freq.into(),
            r.stderr.into(),
            r.bound.into(),
            r.pass.into(),
        ]);
    }
    t
}

pub fn alpha_table(table: &AlphaTable) -> Table {
    let mut t = Table::new(vec!["p", "alpha", "mode", "stderr", "bound", "monotone"]);
    for r in &table.rows {
        t.push(vec![
            r.p.into(),
            r.alpha.into(),
            r.mode.as_str().into(),
            r.stderr.into(),
            r.bound.into(),
            Cell::Text(if r.monotone { "yes" } else { "no" }.into()),
        ]);
    }
    t
}

pub fn extend_table(joint: &JointLawReport, generator: &GeneratorErrorReport) -> Table {
    let mut t = Table::new(vec!["check", "value", "reference", "tolerance", "verdict"]);
    t.push(vec![
        "joint_law_tv".into(),
        joint.max_tv_joint.into(),
        0.0.into(),
        joint.tolerance.into(),
        (joint.max_tv_joint < joint.tolerance).into(),
    ]);
    t.push(vec![
        "anchored_marginal_tv".into(),
        joint.max_tv_marginal.into(),
        0.0.into(),
        joint.tolerance.into(),
        (joint.max_tv_marginal < joint.tolerance).into(),
    ]);
    t.push(vec![
        "generator_error".into(),
        generator.mc.into(),
        generator.exact.into(),
        generator.tolerance.into(),
        generator.pass.into(),
    ]);
    t
}

pub fn stitch_table(report: &StitchReport) -> Table {
    let mut t = Table::new(vec![
        "j",
        "N_j",
        "M_j",
        "K_j",
        "delta_j",
        "alpha_used",
        "anchor",
        "exceed_freq",
        "stderr",
        "verdict",
    ]);
    for r in &report.rows {
        t.push(vec![
            r.j.into(),
            r.n.into(),
            r.m.into(),
            r.k.into(),
            r.delta.into(),
            r.alpha_used.into(),
            r.anchor.as_str().into(),
            r.exceed_freq.into(),
            r.stderr.into(),
            r.pass.into(),
        ]);
    }
    t
}

/// Pooled audit rows followed by one KS row per orientation stratum.
pub fn stitch_audit_table(report: &StitchReport) -> Table {
    let mut t = audit_table(&report.audit);
    for s in &report.strata {
        t.push(vec![
            Cell::Text(format!("ks_lambda_{}", s.orientation)),
            s.ks.into(),
            s.threshold.into(),
            s.pass.into(),
        ]);
    }
    t
}
