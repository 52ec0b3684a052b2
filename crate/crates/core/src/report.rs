//! Serializable views of results. Every number is a decimal string.

use std::fmt::Write as _;

use serde::Serialize;

use crate::bounds::{AtlasRow, BoundId};
use crate::certifier::{Certificate, ConditionReport};
use crate::real::Real;
use crate::sandwich::{FeasibilityReport, FeasibilityStatus, RationalFn, Witness};

pub fn num(v: &Real, digits: u32) -> String {
    v.to_decimal(digits)
}

/// CSV text with a header row.
pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn opt_num(v: Option<&Real>, digits: u32) -> Option<String> {
    v.map(|v| num(v, digits))
}

#[derive(Debug, Serialize)]
pub struct ConditionDto {
    pub label: String,
    pub target: String,
    pub actual: String,
    pub margin: String,
    pub pass: bool,
}

impl ConditionDto {
    pub fn new(c: &ConditionReport, digits: u32) -> Self {
        Self {
            label: c.label.clone(),
            target: num(&c.target, digits),
            actual: num(&c.actual, digits),
            margin: num(&c.margin, digits),
            pass: c.pass,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ConstantDto {
    pub j: usize,
    pub derived: String,
    pub paper_literal: String,
}

#[derive(Debug, Serialize)]
pub struct NearestDto {
    pub case: String,
    pub n: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct CertificateDto {
    pub case: String,
    pub n: Option<usize>,
    pub pattern: Option<String>,
    pub conditions: Vec<ConditionDto>,
    pub radius: Option<String>,
    pub a: String,
    pub precision_digits: u32,
    pub mode: String,
    pub nearest_miss: Option<NearestDto>,
    pub case_iii_constants: Vec<ConstantDto>,
}

impl CertificateDto {
    pub fn new(c: &Certificate) -> Self {
        let digits = c.precision.digits();
        Self {
            case: c.case.map_or("none".into(), |k| k.name().into()),
            n: c.n,
            pattern: c.pattern.map(|p| format!("{p:?}").to_lowercase()),
            conditions: c.conditions.iter().map(|r| ConditionDto::new(r, digits)).collect(),
            radius: opt_num(c.radius.as_ref(), digits),
            a: num(&c.a, digits),
            precision_digits: digits,
            mode: c.mode.name().into(),
            nearest_miss: c.nearest.map(|(case, n)| NearestDto { case: case.name().into(), n }),
            case_iii_constants: c
                .case_iii_constants
                .iter()
                .map(|k| ConstantDto {
                    j: k.j,
                    derived: num(&k.derived, digits),
                    paper_literal: num(&k.paper_literal, digits),
                })
                .collect(),
        }
    }
}

pub fn certificate_text(c: &Certificate) -> String {
    let d = c.precision.digits();
    let mut s = String::new();
    let case = c.case.map_or("none".into(), |k| k.name().to_string());
    let _ = writeln!(s, "case: {case}");
    if let Some(n) = c.n {
        let _ = writeln!(s, "n: {n}");
    }
    if let Some(p) = c.pattern {
        let _ = writeln!(s, "pattern: {}", format!("{p:?}").to_lowercase());
    }
    if let Some(r) = &c.radius {
        let _ = writeln!(s, "radius: {}", num(r, d));
    }
    if let Some((case, n)) = c.nearest {
        let n = n.map_or(String::new(), |n| format!(", n = {n}"));
        let _ = writeln!(s, "nearest miss: case {case}{n}");
    }
    let _ = writeln!(s, "a: {}  digits: {d}  mode: {}", num(&c.a, d), c.mode.name());
    let _ = writeln!(s, "conditions:");
    for r in &c.conditions {
        let _ = writeln!(
            s,
            "  [{}] {}: actual {} target {} margin {}",
            if r.pass { "pass" } else { "FAIL" },
            r.label,
            num(&r.actual, 20),
            num(&r.target, 20),
            num(&r.margin, 6)
        );
    }
    let _ = writeln!(s, "case III constants q_j (derived | paper-literal):");
    for k in &c.case_iii_constants {
        let _ = writeln!(s, "  j={}: {} | {}", k.j, num(&k.derived, 20), num(&k.paper_literal, 20));
    }
    s
}

#[derive(Debug, Serialize)]
pub struct WitnessDto {
    pub x: String,
    pub region: String,
    pub side: String,
    pub inequality: String,
    pub lhs: String,
    pub rhs: String,
    pub margin: String,
    pub stage: String,
}

impl WitnessDto {
    pub fn new(w: &Witness, digits: u32) -> Self {
        Self {
            x: num(&w.x, digits),
            region: w.region.name().into(),
            side: format!("{:?}", w.side).to_lowercase(),
            inequality: w.side.inequality(w.region).into(),
            lhs: num(&w.lhs, digits),
            rhs: num(&w.rhs, digits),
            margin: num(&w.margin, digits),
            stage: w.stage.into(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RationalDto {
    pub p_coeffs: Vec<String>,
    pub q_coeffs: Vec<String>,
}

impl RationalDto {
    pub fn new(r: &RationalFn, digits: u32) -> Self {
        Self {
            p_coeffs: r.p_coeffs().iter().map(|c| num(c, digits)).collect(),
            q_coeffs: r.q_coeffs().iter().map(|c| num(c, digits)).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FeasibilityDto {
    pub n: usize,
    pub m: usize,
    pub region: String,
    pub lo: String,
    pub hi: String,
    pub sample_count: usize,
    pub status: String,
    pub max_slack: Option<String>,
    pub fit: Option<RationalDto>,
}

impl FeasibilityDto {
    pub fn new(r: &FeasibilityReport, digits: u32) -> Self {
        let fit = match &r.status {
            FeasibilityStatus::Feasible(f) => Some(RationalDto::new(f, digits)),
            FeasibilityStatus::Infeasible => None,
        };
        Self {
            n: r.n,
            m: r.m,
            region: r.region.kind.name().into(),
            lo: num(&r.region.lo, digits),
            hi: num(&r.region.hi, digits),
            sample_count: r.sample_count,
            status: if r.is_feasible() { "feasible" } else { "infeasible" }.into(),
            max_slack: opt_num(r.max_slack.as_ref(), digits),
            fit,
        }
    }
}

pub fn feasibility_text(r: &FeasibilityReport, digits: u32) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "degrees ({}, {}) on {} region {} with {} samples: {}",
        r.n,
        r.m,
        r.region.kind.name(),
        r.region.describe(),
        r.sample_count,
        if r.is_feasible() { "feasible" } else { "infeasible" }
    );
    let slack = r.max_slack.as_ref().map_or("none".into(), |v| num(v, 12));
    let _ = writeln!(s, "max_slack: {slack}");
    if let FeasibilityStatus::Feasible(f) = &r.status {
        let _ = writeln!(s, "fit: {}", f.describe(digits.min(30)));
    }
    s
}

/// Cell text `status/max_slack` of the batch matrix.
pub fn matrix_cell(r: &FeasibilityReport) -> String {
    let status = if r.is_feasible() { "feasible" } else { "infeasible" };
    let slack = r.max_slack.as_ref().map_or("none".into(), |v| num(v, 8));
    format!("{status}/{slack}")
}

pub fn matrix_csv(reports: &[Vec<FeasibilityReport>], x_max: &[Real]) -> String {
    let header: Vec<String> =
        std::iter::once("degrees".to_string()).chain(x_max.iter().map(|x| format!("X={}", num(x, 12)))).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = reports.iter().filter_map(|row| {
        let first = row.first()?;
        Some(std::iter::once(format!("({} {})", first.n, first.m)).chain(row.iter().map(matrix_cell)).collect())
    });
    csv_table(&header, rows)
}

pub const ATLAS_COLUMNS: [&str; 7] = ["x", "ln1p", "sqrt", "pade", "karamata", "cubic", "cb"];

fn atlas_cells(row: &AtlasRow, digits: u32) -> Vec<Option<String>> {
    let mut cells = vec![Some(num(&row.x, digits)), Some(num(&row.ln1p, digits))];
    for id in BoundId::ALL {
        let v = row.bounds.iter().find(|(b, _)| *b == id).and_then(|(_, v)| v.as_ref());
        cells.push(opt_num(v, digits));
    }
    cells
}

pub fn atlas_csv(rows: &[AtlasRow], digits: u32) -> String {
    csv_table(
        &ATLAS_COLUMNS,
        rows.iter().map(|row| atlas_cells(row, digits).into_iter().map(Option::unwrap_or_default).collect()),
    )
}

pub fn atlas_json(rows: &[AtlasRow], digits: u32) -> serde_json::Value {
    let rows: Vec<serde_json::Value> = rows
        .iter()
        .map(|row| {
            let map: serde_json::Map<String, serde_json::Value> = ATLAS_COLUMNS
                .iter()
                .zip(atlas_cells(row, digits))
                .map(|(k, v)| (k.to_string(), v.map_or(serde_json::Value::Null, serde_json::Value::String)))
                .collect();
            serde_json::Value::Object(map)
        })
        .collect();
    serde_json::Value::Array(rows)
}

pub fn atlas_text(rows: &[AtlasRow], digits: u32) -> String {
    let width = digits.min(20) as usize + 8;
    let mut s = String::new();
    for c in ATLAS_COLUMNS {
        let _ = write!(s, "{c:>width$}");
    }
    s.push('\n');
    for row in rows {
        for cell in atlas_cells(row, digits.min(20)) {
            let _ = write!(s, "{:>width$}", cell.unwrap_or_else(|| "-".into()));
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::atlas_row;
    use crate::real::Precision;

    #[test]
    fn atlas_csv_layout() {
        let p = Precision::default();
        let rows = vec![atlas_row(&Real::from_i64(3, p), p).unwrap(), atlas_row(&Real::from_f64(-0.5, p), p).unwrap()];
        let csv = atlas_csv(&rows, 10);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,ln1p,sqrt,pade,karamata,cubic,cb");
        assert!(lines[1].starts_with("3e0,1.386294361e0,1.5e0,1.875e0,1.5e0,"), "{}", lines[1]);
        // Only CB is defined left of zero.
        assert!(lines[2].starts_with("-5e-1,-6.931471806e-1,,,,,"), "{}", lines[2]);
    }
}
