//! Command-line interface.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bounds::{atlas_row, bound_value, check_chain, ln1p, BoundId};
use crate::certifier::{certify, certify_conditions, Certificate, ConstantMode, DEFAULT_MAX_N, RADIUS_GRID};
use crate::error::{Error, Result};
use crate::expr::parse;
use crate::grid::{linspace, logspace};
use crate::real::{Precision, Real};
use crate::report::{
    atlas_csv, atlas_json, atlas_text, certificate_text, csv_table, feasibility_text, matrix_csv, num, CertificateDto,
    ConditionDto, FeasibilityDto, WitnessDto,
};
use crate::sandwich::{
    check_sandwich, feasibility_matrix, find_witness, fit_sandwich, FitOptions, RationalFn, Region, RegionKind,
    SandwichCheck, Witness, WitnessBudget, DEFAULT_DELTA,
};
use crate::selftest;

#[derive(Debug, Parser)]
#[command(
    name = "logbound",
    version,
    about = "Extended-precision checks of bounds for ln(1+x) and 2t ln t",
    long_about = "Extended-precision checks of bounds for ln(1+x) and 2t ln t.\n\n\
        Exit status: 0 when every check passes or the artifact was produced, \
        1 when a violation or infeasibility was found (the report carries the witness), \
        2 on usage or domain errors."
)]
pub struct Cli {
    /// Significant decimal digits of working precision (at least 15).
    #[arg(long, global = true, default_value_t = Precision::DEFAULT_DIGITS)]
    pub digits: u32,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Use the literal closed-form case III constants instead of the derived ones.
    #[arg(long, global = true)]
    pub paper_literal: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegionArg {
    Upper,
    Lower,
}

impl From<RegionArg> for RegionKind {
    fn from(r: RegionArg) -> Self {
        match r {
            RegionArg::Upper => RegionKind::Upper,
            RegionArg::Lower => RegionKind::Lower,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bound atlas: ln(1+x) and every bound on a grid.
    Table {
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        xmin: String,
        #[arg(long, default_value = "10", allow_hyphen_values = true)]
        xmax: String,
        #[arg(long, default_value_t = 11)]
        points: usize,
        /// Logarithmic spacing (needs xmin > 0).
        #[arg(long)]
        log: bool,
    },
    /// Checks ln(1+x) <= CB <= each classical bound and ranks their tightness.
    Compare {
        #[arg(long, default_value = "1e-6", allow_hyphen_values = true)]
        xmin: String,
        #[arg(long, default_value = "1e6", allow_hyphen_values = true)]
        xmax: String,
        #[arg(long, default_value_t = 500)]
        points: usize,
        /// Allowed negative margin for each comparison.
        #[arg(long, default_value = "1e-30", allow_hyphen_values = true)]
        slack: String,
        /// Linear spacing instead of logarithmic.
        #[arg(long)]
        linear: bool,
    },
    /// Checks the derivative conditions of a candidate P(t) at t = 1.
    Certify {
        #[command(flatten)]
        candidate: CandidateArgs,
        /// Only check the conditions; skip the radius search.
        #[arg(long)]
        no_radius: bool,
    },
    /// Certifies a candidate and reports its verified radius.
    Radius {
        #[command(flatten)]
        candidate: CandidateArgs,
    },
    /// Rational sandwiches between ln(1+x) and CB.
    #[command(subcommand)]
    Sandwich(SandwichCommand),
    /// Runs the invariant suites of every module.
    Selftest,
}

#[derive(Debug, Args)]
pub struct CandidateArgs {
    /// Candidate P as an expression in t.
    #[arg(long, allow_hyphen_values = true)]
    pub expr: String,
    /// Half-width of the domain (1 - a, 1 + a), with a in (0, 1).
    #[arg(long, default_value = "0.9", allow_hyphen_values = true)]
    pub a: String,
    /// Largest n tried in cases I to III.
    #[arg(long, default_value_t = DEFAULT_MAX_N)]
    pub max_n: usize,
}

#[derive(Debug, Args)]
pub struct RationalArgs {
    /// Numerator polynomial in x.
    #[arg(long, allow_hyphen_values = true)]
    pub p: String,
    /// Denominator polynomial in x.
    #[arg(long, allow_hyphen_values = true)]
    pub q: String,
    #[arg(long, value_enum, default_value_t = RegionArg::Upper)]
    pub region: RegionArg,
}

#[derive(Debug, Args)]
pub struct SpanArgs {
    /// Right end of the upper region [0, xmax].
    #[arg(long, default_value = "10", allow_hyphen_values = true)]
    pub xmax: String,
    /// Distance from -1 of the lower region [-1 + delta, 0].
    #[arg(long, default_value_t = DEFAULT_DELTA.to_string(), allow_hyphen_values = true)]
    pub delta: String,
}

#[derive(Debug, Subcommand)]
pub enum SandwichCommand {
    /// Checks ln(1+x) <= P/Q <= CB (upper) or the reverse (lower) on a grid.
    Check {
        #[command(flatten)]
        rational: RationalArgs,
        #[command(flatten)]
        span: SpanArgs,
        #[arg(long, default_value_t = 1000)]
        grid: usize,
    },
    /// Searches the whole region for a point where P/Q leaves the band.
    Witness {
        #[command(flatten)]
        rational: RationalArgs,
        /// Largest fallback grid.
        #[arg(long, default_value_t = WitnessBudget::default().max_grid_points)]
        max_grid: usize,
    },
    /// Linear feasibility of a degree-(n, m) sandwich on sampled points.
    Fit {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, value_enum, default_value_t = RegionArg::Upper)]
        region: RegionArg,
        #[command(flatten)]
        span: SpanArgs,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = FitOptions::default().bisection_steps)]
        bisection_steps: usize,
        /// Batch mode: comma-separated degree pairs such as `2x2,4x4`.
        #[arg(long)]
        degrees: Option<String>,
        /// Batch mode: comma-separated xmax values, one column each.
        #[arg(long)]
        xmax_list: Option<String>,
    },
}

/// A rendered report and the exit code that goes with it.
pub struct Outcome {
    pub body: String,
    pub code: i32,
}

fn real_arg(name: &str, text: &str, p: Precision) -> Result<Real> {
    Real::parse_decimal(text, p).map_err(|_| Error::InvalidArgument(format!("--{name}: not a number: `{text}`")))
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            let written = match &cli.out {
                Some(path) => write_atomic(path, &out.body),
                None => std::io::stdout().write_all(out.body.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => out.code,
                Err(e) => {
                    eprintln!("logbound: cannot write report: {e}");
                    2
                }
            }
        }
        Err(e) => {
            eprintln!("logbound: {e}");
            2
        }
    }
}

fn write_atomic(path: &Path, body: &str) -> std::result::Result<(), String> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or("output path has no file name")?.to_string_lossy().to_string();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    std::fs::write(&tmp, body).map_err(|e| e.to_string())?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        e.to_string()
    })
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let p = Precision::new(cli.digits)?;
    let mode = if cli.paper_literal { ConstantMode::PaperLiteral } else { ConstantMode::Derived };
    match &cli.command {
        Command::Table { xmin, xmax, points, log } => table(cli.format, xmin, xmax, *points, *log, p),
        Command::Compare { xmin, xmax, points, slack, linear } => {
            compare(cli.format, xmin, xmax, *points, slack, *linear, p)
        }
        Command::Certify { candidate, no_radius } => {
            let cert = run_certify(candidate, mode, !no_radius, p)?;
            let code = if cert.is_certified() { 0 } else { 1 };
            Ok(Outcome { body: render_certificate(&cert, cli.format), code })
        }
        Command::Radius { candidate } => radius(cli.format, candidate, mode, p),
        Command::Sandwich(cmd) => sandwich(cli.format, cmd, p),
        Command::Selftest => selftest_cmd(cli.format, p),
    }
}

fn grid(xmin: &Real, xmax: &Real, points: usize, log: bool, p: Precision) -> Result<Vec<Real>> {
    if points < 2 {
        return Err(Error::InvalidArgument("--points must be at least 2".into()));
    }
    if xmin >= xmax {
        return Err(Error::InvalidArgument("--xmin must be below --xmax".into()));
    }
    if log {
        if !xmin.is_positive() {
            return Err(Error::InvalidArgument("logarithmic spacing needs xmin > 0".into()));
        }
        Ok(logspace(xmin, xmax, points, p))
    } else {
        Ok(linspace(xmin, xmax, points, p))
    }
}

fn table(format: Format, xmin: &str, xmax: &str, points: usize, log: bool, p: Precision) -> Result<Outcome> {
    let xs = grid(&real_arg("xmin", xmin, p)?, &real_arg("xmax", xmax, p)?, points, log, p)?;
    let rows = xs.iter().map(|x| atlas_row(x, p)).collect::<Result<Vec<_>>>()?;
    let body = match format {
        Format::Csv => atlas_csv(&rows, p.digits()),
        Format::Json => json(&atlas_json(&rows, p.digits())),
        Format::Text => atlas_text(&rows, p.digits()),
    };
    Ok(Outcome { body, code: 0 })
}

#[derive(Serialize)]
struct CompareRow {
    bound: String,
    holds: bool,
    min_excess: String,
    max_excess: String,
    tightest_points: usize,
}

#[derive(Serialize)]
struct CompareReport {
    points: usize,
    chain_holds: bool,
    first_violation: Option<String>,
    min_cb_gap: String,
    rows: Vec<CompareRow>,
}

fn compare(
    format: Format,
    xmin: &str,
    xmax: &str,
    points: usize,
    slack: &str,
    linear: bool,
    p: Precision,
) -> Result<Outcome> {
    let xmin = real_arg("xmin", xmin, p)?;
    if xmin.is_negative() {
        return Err(Error::InvalidArgument("compare works on x >= 0".into()));
    }
    let xs = grid(&xmin, &real_arg("xmax", xmax, p)?, points, !linear, p)?;
    let slack = real_arg("slack", slack, p)?;
    let mut first_violation = None;
    let mut min_gap: Option<Real> = None;
    let mut excess: Vec<(Option<Real>, Option<Real>, usize, bool)> = vec![(None, None, 0, true); 4];
    for x in &xs {
        if first_violation.is_none() {
            if let Some(v) = check_chain(x, &slack, p)? {
                first_violation = Some(format!("x = {}: {} > {}", num(&v.x, 20), v.lower, v.upper));
            }
        }
        let cb = bound_value(BoundId::Cb, x, p)?;
        let gap = &cb - ln1p(x, p)?;
        min_gap = Some(min_gap.map_or(gap.clone(), |g| g.min(&gap)));
        let values = BoundId::CLASSICAL.map(|id| bound_value(id, x, p));
        let mut best: Option<(usize, Real)> = None;
        for (i, v) in values.into_iter().enumerate() {
            let v = v?;
            let e = &v - &cb;
            let slot = &mut excess[i];
            slot.3 &= e >= -&slack;
            slot.0 = Some(slot.0.take().map_or(e.clone(), |m| m.min(&e)));
            slot.1 = Some(slot.1.take().map_or(e.clone(), |m| m.max(&e)));
            if best.as_ref().is_none_or(|(_, b)| v < *b) {
                best = Some((i, v));
            }
        }
        if let Some((i, _)) = best {
            excess[i].2 += 1;
        }
    }
    let d = p.digits().min(20);
    let rows: Vec<CompareRow> = BoundId::CLASSICAL
        .iter()
        .zip(&excess)
        .map(|(id, (lo, hi, tight, holds))| CompareRow {
            bound: id.name().into(),
            holds: *holds,
            min_excess: num(lo.as_ref().expect("non-empty grid"), d),
            max_excess: num(hi.as_ref().expect("non-empty grid"), d),
            tightest_points: *tight,
        })
        .collect();
    let report = CompareReport {
        points: xs.len(),
        chain_holds: first_violation.is_none(),
        first_violation,
        min_cb_gap: num(min_gap.as_ref().expect("non-empty grid"), d),
        rows,
    };
    let code = if report.chain_holds { 0 } else { 1 };
    let body = match format {
        Format::Json => json(&report),
        Format::Csv => csv_table(
            &["bound", "holds", "min_excess", "max_excess", "tightest_points"],
            report.rows.iter().map(|r| {
                vec![
                    r.bound.clone(),
                    r.holds.to_string(),
                    r.min_excess.clone(),
                    r.max_excess.clone(),
                    r.tightest_points.to_string(),
                ]
            }),
        ),
        Format::Text => {
            let mut s = format!(
                "ln(1+x) <= cb <= classical on {} points: {}\n",
                report.points,
                if report.chain_holds { "holds" } else { "VIOLATED" }
            );
            if let Some(v) = &report.first_violation {
                let _ = writeln!(s, "first violation: {v}");
            }
            let _ = writeln!(s, "smallest cb - ln(1+x): {}", report.min_cb_gap);
            let _ = writeln!(
                s,
                "{:<10} {:<6} {:>28} {:>28} {:>9}",
                "bound", "holds", "min(bound - cb)", "max(bound - cb)", "tightest"
            );
            for r in &report.rows {
                let _ = writeln!(
                    s,
                    "{:<10} {:<6} {:>28} {:>28} {:>9}",
                    r.bound, r.holds, r.min_excess, r.max_excess, r.tightest_points
                );
            }
            s
        }
    };
    Ok(Outcome { body, code })
}

fn run_certify(c: &CandidateArgs, mode: ConstantMode, with_radius: bool, p: Precision) -> Result<Certificate> {
    let e = parse(&c.expr)?;
    let a = real_arg("a", &c.a, p)?;
    if with_radius {
        certify(&e, &a, c.max_n, mode, p)
    } else {
        certify_conditions(&e, &a, c.max_n, mode, p)
    }
}

fn render_certificate(cert: &Certificate, format: Format) -> String {
    match format {
        Format::Json => json(&CertificateDto::new(cert)),
        Format::Text => certificate_text(cert),
        Format::Csv => csv_table(
            &["label", "target", "actual", "margin", "pass"],
            cert.conditions.iter().map(|r| {
                let c = ConditionDto::new(r, cert.precision.digits());
                vec![c.label, c.target, c.actual, c.margin, c.pass.to_string()]
            }),
        ),
    }
}

#[derive(Serialize)]
struct RadiusReport {
    case: String,
    n: Option<usize>,
    pattern: Option<String>,
    radius: String,
    grid_points: usize,
    precision_digits: u32,
}

fn radius(format: Format, c: &CandidateArgs, mode: ConstantMode, p: Precision) -> Result<Outcome> {
    let cert = run_certify(c, mode, true, p)?;
    let Some(r) = &cert.radius else {
        // No certificate: report the conditions that failed.
        return Ok(Outcome { body: render_certificate(&cert, format), code: 1 });
    };
    let report = RadiusReport {
        case: cert.case.map_or("none".into(), |k| k.name().into()),
        n: cert.n,
        pattern: cert.pattern.map(|p| format!("{p:?}").to_lowercase()),
        radius: num(r, p.digits()),
        grid_points: RADIUS_GRID,
        precision_digits: p.digits(),
    };
    let body = match format {
        Format::Json => json(&report),
        Format::Csv => csv_table(
            &["case", "n", "pattern", "radius", "grid_points"],
            [vec![
                report.case.clone(),
                report.n.map_or(String::new(), |n| n.to_string()),
                report.pattern.clone().unwrap_or_default(),
                report.radius.clone(),
                report.grid_points.to_string(),
            ]],
        ),
        Format::Text => format!(
            "case {}{} ({}): radius {} verified on {} points\n",
            report.case,
            report.n.map_or(String::new(), |n| format!(", n = {n}")),
            report.pattern.clone().unwrap_or_default(),
            report.radius,
            report.grid_points
        ),
    };
    Ok(Outcome { body, code: 0 })
}

fn rational(args: &RationalArgs, p: Precision) -> Result<RationalFn> {
    RationalFn::from_exprs(&parse(&args.p)?, &parse(&args.q)?, p)
}

fn region(kind: RegionKind, span: &SpanArgs, p: Precision) -> Result<Region> {
    match kind {
        RegionKind::Upper => Region::upper(&real_arg("xmax", &span.xmax, p)?, p),
        RegionKind::Lower => Region::lower(&real_arg("delta", &span.delta, p)?, p),
    }
}

fn render_witness(w: &Witness, format: Format, digits: u32) -> String {
    let dto = WitnessDto::new(w, digits);
    match format {
        Format::Json => json(&serde_json::json!({ "status": "violated", "witness": dto })),
        Format::Csv => csv_table(
            &["x", "region", "side", "inequality", "lhs", "rhs", "margin", "stage"],
            [vec![dto.x, dto.region, dto.side, dto.inequality, dto.lhs, dto.rhs, dto.margin, dto.stage]],
        ),
        Format::Text => format!("witness: {w}\n"),
    }
}

fn sandwich(format: Format, cmd: &SandwichCommand, p: Precision) -> Result<Outcome> {
    match cmd {
        SandwichCommand::Check { rational: args, span, grid } => {
            let r = rational(args, p)?;
            let region = region(args.region.into(), span, p)?;
            match check_sandwich(&r, &region, *grid, p)? {
                SandwichCheck::Violated(w) => Ok(Outcome { body: render_witness(&w, format, p.digits()), code: 1 }),
                SandwichCheck::Holds { points } => {
                    let body = match format {
                        Format::Json => json(&serde_json::json!({
                            "status": "holds",
                            "region": region.kind.name(),
                            "lo": num(&region.lo, p.digits()),
                            "hi": num(&region.hi, p.digits()),
                            "points": points,
                        })),
                        Format::Csv => csv_table(&["status", "points"], [vec!["holds".into(), points.to_string()]]),
                        Format::Text => format!("holds on {points} points of {}\n", region.describe()),
                    };
                    Ok(Outcome { body, code: 0 })
                }
            }
        }
        SandwichCommand::Witness { rational: args, max_grid } => {
            let r = rational(args, p)?;
            let budget = WitnessBudget { max_grid_points: *max_grid, ..WitnessBudget::default() };
            let w = find_witness(&r, args.region.into(), budget, p)?;
            Ok(Outcome { body: render_witness(&w, format, p.digits()), code: 1 })
        }
        SandwichCommand::Fit { n, m, region: kind, span, samples, bisection_steps, degrees, xmax_list } => {
            let opts = FitOptions { bisection_steps: *bisection_steps };
            match (degrees, xmax_list) {
                (None, None) => {
                    let region = region((*kind).into(), span, p)?;
                    let rep = fit_sandwich(*n, *m, &region, *samples, opts, p)?;
                    let body = match format {
                        Format::Json => json(&FeasibilityDto::new(&rep, p.digits())),
                        Format::Text => feasibility_text(&rep, p.digits()),
                        Format::Csv => {
                            let d = FeasibilityDto::new(&rep, p.digits());
                            csv_table(
                                &["n", "m", "region", "lo", "hi", "samples", "status", "max_slack"],
                                [vec![
                                    d.n.to_string(),
                                    d.m.to_string(),
                                    d.region,
                                    d.lo,
                                    d.hi,
                                    d.sample_count.to_string(),
                                    d.status,
                                    d.max_slack.unwrap_or_default(),
                                ]],
                            )
                        }
                    };
                    Ok(Outcome { body, code: 0 })
                }
                (Some(deg), Some(xs)) => {
                    if *kind != RegionArg::Upper {
                        return Err(Error::InvalidArgument("batch mode covers the upper region".into()));
                    }
                    let degrees = parse_degrees(deg)?;
                    let xs = xs.split(',').map(|t| real_arg("xmax-list", t, p)).collect::<Result<Vec<_>>>()?;
                    let matrix = feasibility_matrix(&degrees, &xs, *samples, opts, p)?;
                    let body = match format {
                        Format::Json => {
                            let cells: Vec<Vec<FeasibilityDto>> = matrix
                                .iter()
                                .map(|row| row.iter().map(|r| FeasibilityDto::new(r, p.digits())).collect())
                                .collect();
                            json(&cells)
                        }
                        _ => matrix_csv(&matrix, &xs),
                    };
                    Ok(Outcome { body, code: 0 })
                }
                _ => Err(Error::InvalidArgument("--degrees and --xmax-list go together".into())),
            }
        }
    }
}

fn parse_degrees(text: &str) -> Result<Vec<(usize, usize)>> {
    text.split(',')
        .map(|pair| {
            let (n, m) = pair
                .trim()
                .split_once('x')
                .ok_or_else(|| Error::InvalidArgument(format!("degree pair `{pair}` is not NxM")))?;
            let parse = |s: &str| {
                s.trim().parse::<usize>().map_err(|_| Error::InvalidArgument(format!("bad degree in `{pair}`")))
            };
            Ok((parse(n)?, parse(m)?))
        })
        .collect()
}

#[derive(Serialize)]
struct SelftestRow {
    name: String,
    pass: bool,
    detail: String,
}

fn selftest_cmd(format: Format, p: Precision) -> Result<Outcome> {
    let results = selftest::run_all(p);
    let all = results.iter().all(|r| r.pass);
    let body = match format {
        Format::Json => {
            let rows: Vec<SelftestRow> = results
                .iter()
                .map(|r| SelftestRow { name: r.name.into(), pass: r.pass, detail: r.detail.clone() })
                .collect();
            json(&serde_json::json!({ "pass": all, "checks": rows }))
        }
        Format::Csv => csv_table(
            &["name", "pass", "detail"],
            results.iter().map(|r| vec![r.name.to_string(), r.pass.to_string(), r.detail.clone()]),
        ),
        Format::Text => {
            let mut s = String::new();
            for r in &results {
                let _ = writeln!(s, "{} {}: {}", if r.pass { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            let passed = results.iter().filter(|r| r.pass).count();
            let _ = writeln!(s, "{passed}/{} checks passed", results.len());
            s
        }
    };
    Ok(Outcome { body, code: if all { 0 } else { 1 } })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_list() {
        assert_eq!(parse_degrees("2x2, 4x3").unwrap(), vec![(2, 2), (4, 3)]);
        assert!(parse_degrees("2-2").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
