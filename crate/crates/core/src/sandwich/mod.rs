//! Rational sandwiches between `ln(1+x)` and `cb(x) = f(x)/sqrt(x+1)`.
//!
//! On `x >= 0` the curves satisfy `ln(1+x) <= cb(x)`, on `(-1, 0]` the
//! reverse. No rational `P/Q` fits between them on either whole region, so
//! every candidate has a witness; on compact pieces the question becomes a
//! linear feasibility problem in the coefficients (see [`fit`]).

pub mod fit;
pub mod rational;
pub mod simplex;

use std::fmt;

use serde::Serialize;

use crate::bounds::{bound_value, ln1p, BoundId};
use crate::error::{Error, Result};
use crate::grid::linspace;
use crate::real::{Precision, Real};

pub use fit::{feasibility_matrix, fit_on_samples, fit_sandwich, FeasibilityReport, FeasibilityStatus, FitOptions};
pub use rational::RationalFn;

/// Violations at or below this are not reported.
pub const WITNESS_MARGIN: f64 = 1e-20;
/// Default distance kept from `-1` in the lower region.
pub const DEFAULT_DELTA: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    /// `x >= 0`: `ln(1+x) <= P/Q <= cb(x)`.
    Upper,
    /// `-1 < x <= 0`: `cb(x) <= P/Q <= ln(1+x)`.
    Lower,
}

impl RegionKind {
    pub fn name(self) -> &'static str {
        match self {
            RegionKind::Upper => "upper",
            RegionKind::Lower => "lower",
        }
    }
}

/// A compact piece `[lo, hi]` of one of the two regions.
#[derive(Debug, Clone)]
pub struct Region {
    pub kind: RegionKind,
    pub lo: Real,
    pub hi: Real,
}

impl Region {
    /// `[0, x_max]`.
    pub fn upper(x_max: &Real, p: Precision) -> Result<Self> {
        if !x_max.is_positive() {
            return Err(Error::InvalidArgument(format!("xmax = {x_max} must be positive")));
        }
        Ok(Self { kind: RegionKind::Upper, lo: Real::zero(p), hi: x_max.with_precision(p) })
    }

    /// `[-1 + delta, 0]`.
    pub fn lower(delta: &Real, p: Precision) -> Result<Self> {
        let one = Real::one(p);
        if !(delta.is_positive() && *delta < one) {
            return Err(Error::InvalidArgument(format!("delta = {delta} must lie in (0, 1)")));
        }
        Ok(Self { kind: RegionKind::Lower, lo: delta.with_precision(p) - one, hi: Real::zero(p) })
    }

    pub fn describe(&self) -> String {
        format!("[{}, {}]", self.lo.to_decimal(12), self.hi.to_decimal(12))
    }
}

/// The ln side compares against `ln(1+x)`, the cb side against `cb(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Ln,
    Cb,
}

impl Side {
    /// The inequality that fails, written `lhs <= rhs`.
    pub fn inequality(self, kind: RegionKind) -> &'static str {
        match (kind, self) {
            (RegionKind::Upper, Side::Ln) => "ln(1+x) <= P/Q",
            (RegionKind::Upper, Side::Cb) => "P/Q <= cb(x)",
            (RegionKind::Lower, Side::Ln) => "P/Q <= ln(1+x)",
            (RegionKind::Lower, Side::Cb) => "cb(x) <= P/Q",
        }
    }
}

/// A point where `lhs <= rhs` fails; `margin = lhs - rhs`, confirmed above
/// [`WITNESS_MARGIN`] at doubled precision.
#[derive(Debug, Clone)]
pub struct Witness {
    pub x: Real,
    pub region: RegionKind,
    pub side: Side,
    pub lhs: Real,
    pub rhs: Real,
    pub margin: Real,
    /// Search stage that produced the point.
    pub stage: &'static str,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "x = {}: {} fails ({} > {}, margin {})",
            self.x.to_decimal(20),
            self.side.inequality(self.region),
            self.lhs.to_decimal(20),
            self.rhs.to_decimal(20),
            self.margin.to_decimal(6)
        )
    }
}

#[derive(Debug, Clone)]
pub enum SandwichCheck {
    Holds { points: usize },
    Violated(Witness),
}

/// Both inequalities at `x` as `(side, lhs, rhs)`.
fn sides(r: &RationalFn, x: &Real, kind: RegionKind, p: Precision) -> Result<[(Side, Real, Real); 2]> {
    let value = r.eval(x, p)?;
    let ln = ln1p(x, p)?;
    let cb = bound_value(BoundId::Cb, x, p)?;
    Ok(match kind {
        RegionKind::Upper => [(Side::Ln, ln, value.clone()), (Side::Cb, value, cb)],
        RegionKind::Lower => [(Side::Ln, value.clone(), ln), (Side::Cb, cb, value)],
    })
}

/// A confirmed violation at `x`, if any.
pub fn witness_at(
    r: &RationalFn,
    x: &Real,
    kind: RegionKind,
    stage: &'static str,
    p: Precision,
) -> Result<Option<Witness>> {
    let threshold = Real::from_f64(WITNESS_MARGIN, p);
    let candidates = sides(r, x, kind, p)?;
    for (side, lhs, rhs) in candidates {
        if &lhs - &rhs <= threshold {
            continue;
        }
        let hi = p.doubled();
        let x_hi = x.with_precision(hi);
        let [a, b] = sides(r, &x_hi, kind, hi)?;
        let (_, lhs, rhs) = if a.0 == side { a } else { b };
        let margin = &lhs - &rhs;
        if margin > threshold.with_precision(hi) {
            return Ok(Some(Witness { x: x_hi, region: kind, side, lhs, rhs, margin, stage }));
        }
    }
    Ok(None)
}

/// Fails when `Q` vanishes or changes sign along the sorted points.
fn q_sign_scan(r: &RationalFn, points: &[Real], p: Precision) -> Result<()> {
    let mut sign = 0;
    for x in points {
        let s = r.eval_q(x, p).signum();
        if s == 0 || (sign != 0 && s != sign) {
            return Err(Error::DenominatorVanishes { at: x.to_decimal(20) });
        }
        sign = s;
    }
    Ok(())
}

/// Checks both inequalities on `grid` equally spaced points of the region.
pub fn check_sandwich(r: &RationalFn, region: &Region, grid: usize, p: Precision) -> Result<SandwichCheck> {
    if grid < 2 {
        return Err(Error::InvalidArgument("grid needs at least 2 points".into()));
    }
    let points = linspace(&region.lo, &region.hi, grid, p);
    q_sign_scan(r, &points, p)?;
    for x in &points {
        if let Some(w) = witness_at(r, x, region.kind, "grid", p)? {
            return Ok(SandwichCheck::Violated(w));
        }
    }
    Ok(SandwichCheck::Holds { points: grid })
}

/// Limits for [`find_witness`].
#[derive(Debug, Clone, Copy)]
pub struct WitnessBudget {
    /// Steps of the geometric scans.
    pub max_doublings: usize,
    /// Largest fallback grid.
    pub max_grid_points: usize,
}

impl Default for WitnessBudget {
    fn default() -> Self {
        Self { max_doublings: 2048, max_grid_points: 100_000 }
    }
}

/// Searches the whole region for a confirmed violation.
///
/// Upper region: the behaviour at infinity decides first. If `deg P > deg Q`
/// the quotient outgrows `cb(x) ~ (2 - pi/2) sqrt(x)`; otherwise it stays
/// bounded while `ln(1+x)` does not, and the crossing is near
/// `exp(|lim P/Q| + 1)`. Lower region: near `-1` the quotient either stays
/// bounded, so it exceeds `ln(1+x)`, or has a pole at `-1` that outruns the
/// `1/sqrt(x+1)` blow-up of `cb`. Both regions then probe toward 0, where the
/// quotient has to match `ln(1+x)` through `x^4`, and finally refine plain
/// grids. A sign change of `Q` between probes leads to a pole, which is
/// itself a witness.
pub fn find_witness(r: &RationalFn, kind: RegionKind, budget: WitnessBudget, p: Precision) -> Result<Witness> {
    let one = Real::one(p);
    let mut tracker = SignTracker::default();
    let mut probe = |x: Real, stage: &'static str| -> Result<Option<Witness>> {
        if let Some((a, b)) = tracker.observe(r, &x, p)? {
            return pole_witness(r, &a, &b, kind, p).map(Some);
        }
        witness_at(r, &x, kind, stage, p)
    };

    match kind {
        RegionKind::Upper => {
            if let Some(w) = probe(Real::zero(p), "contact")? {
                return Ok(w);
            }
            if r.deg_p() <= r.deg_q() {
                let limit = if r.deg_p() == r.deg_q() {
                    (&r.p_coeffs()[r.deg_p()] / &r.q_coeffs()[r.deg_q()]).abs()
                } else {
                    Real::zero(p)
                };
                // exp would overflow far beyond the representable range.
                if limit < Real::from_i64(1 << 20, p) {
                    let x = (limit + &one).exp();
                    if let Some(w) = probe(x.clone(), "asymptotic")? {
                        return Ok(w);
                    }
                    for k in 1..=budget.max_doublings.min(64) {
                        if let Some(w) = probe(x.mul_pow2(k as i64), "asymptotic")? {
                            return Ok(w);
                        }
                    }
                }
            }
            for j in 0..=budget.max_doublings {
                if let Some(w) = probe(Real::one(p).mul_pow2(j as i64), "asymptotic")? {
                    return Ok(w);
                }
            }
        }
        RegionKind::Lower => {
            if let Some(w) = probe(Real::zero(p), "contact")? {
                return Ok(w);
            }
            let max_j = (p.bits() - 16).min(budget.max_doublings);
            for j in 1..max_j {
                let x = Real::one(p).mul_pow2(-(j as i64)) - &one;
                if let Some(w) = probe(x, "boundary")? {
                    return Ok(w);
                }
            }
        }
    }

    let sign = match kind {
        RegionKind::Upper => 1,
        RegionKind::Lower => -1,
    };
    let max_j = (p.bits() / 2).min(budget.max_doublings);
    for j in 1..max_j {
        let x = Real::one(p).mul_pow2(-(j as i64)).scale(sign);
        if let Some(w) = probe(x, "contact")? {
            return Ok(w);
        }
    }

    let spans: Vec<Region> = match kind {
        RegionKind::Upper => vec![Region::upper(&one, p)?, Region::upper(&Real::from_i64(100, p), p)?],
        RegionKind::Lower => vec![Region::lower(&Real::one(p).mul_pow2(16 - p.bits() as i64), p)?],
    };
    let mut n = 1000;
    while n <= budget.max_grid_points {
        for region in &spans {
            if let SandwichCheck::Violated(mut w) = check_sandwich(r, region, n, p)? {
                w.stage = "grid";
                return Ok(w);
            }
        }
        n *= 10;
    }
    Err(Error::BudgetExhausted(format!("no witness in the {} region; retry at higher precision", kind.name())))
}

/// Remembers the sign of `Q` at probed points and reports a bracketing pair
/// when it changes.
#[derive(Default)]
struct SignTracker {
    last: Option<(i32, Real)>,
}

impl SignTracker {
    fn observe(&mut self, r: &RationalFn, x: &Real, p: Precision) -> Result<Option<(Real, Real)>> {
        let s = r.eval_q(x, p).signum();
        if s == 0 {
            return Err(Error::DenominatorVanishes { at: x.to_decimal(20) });
        }
        let bracket = match &self.last {
            Some((prev, at)) if *prev != s => Some((at.clone(), x.clone())),
            _ => None,
        };
        self.last = Some((s, x.clone()));
        Ok(bracket)
    }
}

/// Near a simple root of `Q` the quotient leaves any bounded band. Bisects the
/// bracket and tests both ends; a removable root yields an error.
fn pole_witness(r: &RationalFn, a: &Real, b: &Real, kind: RegionKind, p: Precision) -> Result<Witness> {
    let sign_a = r.eval_q(a, p).signum();
    let (mut lo, mut hi) = (a.clone(), b.clone());
    for _ in 0..POLE_BISECTIONS {
        let mid = (&lo + &hi).mul_pow2(-1);
        match r.eval_q(&mid, p).signum() {
            0 => {
                hi = mid;
                break;
            }
            s if s == sign_a => lo = mid,
            _ => hi = mid,
        }
    }
    for x in [&lo, &hi] {
        if r.eval_q(x, p).is_zero() {
            continue;
        }
        if let Some(w) = witness_at(r, x, kind, "pole", p)? {
            return Ok(w);
        }
    }
    Err(Error::DenominatorVanishes { at: format!("between {} and {}", a.to_decimal(20), b.to_decimal(20)) })
}

const POLE_BISECTIONS: usize = 80;
