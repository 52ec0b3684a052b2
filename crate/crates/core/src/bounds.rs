//! The bound family for `ln(1 + x)`, the gap function `R`, and closed-form
//! derivatives of `H(t) = f(t^2 - 1)`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::eval;
use crate::expr::{parse, Expr};
use crate::jet::{factorial, jet};
use crate::real::{Precision, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundId {
    Sqrt,
    Pade,
    Karamata,
    Cubic,
    Cb,
}

impl BoundId {
    pub const ALL: [BoundId; 5] = [BoundId::Sqrt, BoundId::Pade, BoundId::Karamata, BoundId::Cubic, BoundId::Cb];

    /// The four classical bounds that CB improves on.
    pub const CLASSICAL: [BoundId; 4] = [BoundId::Sqrt, BoundId::Pade, BoundId::Karamata, BoundId::Cubic];

    pub fn name(self) -> &'static str {
        match self {
            BoundId::Sqrt => "sqrt",
            BoundId::Pade => "pade",
            BoundId::Karamata => "karamata",
            BoundId::Cubic => "cubic",
            BoundId::Cb => "cb",
        }
    }

    pub fn formula_text(self) -> &'static str {
        match self {
            BoundId::Sqrt => "x/sqrt(x+1)",
            BoundId::Pade => "x*(2+x)/(2*(1+x))",
            BoundId::Karamata => "x*(6+x)/(2*(3+2*x))",
            BoundId::Cubic => "(x+2)*((x+1)^3-1)/(3*(1+x)*((x+1)^2+1))",
            BoundId::Cb => "f(x)/sqrt(x+1)",
        }
    }

    pub fn spec(self) -> BoundSpec {
        let formula = parse(self.formula_text()).expect("built-in formula parses");
        let (region, directions, label) = match self {
            BoundId::Cb => (
                Interval::OPEN_MINUS_ONE,
                vec![(Interval::NON_NEGATIVE, Direction::Upper), (Interval::MINUS_ONE_TO_ZERO, Direction::Lower)],
                "CB: ln(1+x) <= f(x)/sqrt(x+1) on x >= 0, reversed on (-1, 0]",
            ),
            BoundId::Sqrt => (
                Interval::NON_NEGATIVE,
                vec![(Interval::NON_NEGATIVE, Direction::Upper)],
                "classical square-root bound (first half of Karamata's pair)",
            ),
            BoundId::Pade => {
                (Interval::NON_NEGATIVE, vec![(Interval::NON_NEGATIVE, Direction::Upper)], "classical Pade-type bound")
            }
            BoundId::Karamata => (
                Interval::NON_NEGATIVE,
                vec![(Interval::NON_NEGATIVE, Direction::Upper)],
                "rational bound (second half of Karamata's pair)",
            ),
            BoundId::Cubic => (
                Interval::NON_NEGATIVE,
                vec![(Interval::NON_NEGATIVE, Direction::Upper)],
                "classical cubic rational bound",
            ),
        };
        BoundSpec { id: self, formula, region, directions, label }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BoundId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown bound `{s}`")))
    }
}

/// Interval `lo..hi` with an optional upper end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub lo_closed: bool,
    pub hi: Option<f64>,
}

impl Interval {
    pub const NON_NEGATIVE: Interval = Interval { lo: 0.0, lo_closed: true, hi: None };
    pub const OPEN_MINUS_ONE: Interval = Interval { lo: -1.0, lo_closed: false, hi: None };
    pub const MINUS_ONE_TO_ZERO: Interval = Interval { lo: -1.0, lo_closed: false, hi: Some(0.0) };

    pub fn contains(&self, x: &Real) -> bool {
        let p = Precision::default();
        let lo = Real::from_f64(self.lo, p);
        let above = if self.lo_closed { *x >= lo } else { *x > lo };
        above && self.hi.is_none_or(|hi| *x <= Real::from_f64(hi, p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `ln(1+x) <= bound`
    Upper,
    /// `ln(1+x) >= bound`
    Lower,
}

#[derive(Debug, Clone)]
pub struct BoundSpec {
    pub id: BoundId,
    pub formula: Expr,
    pub region: Interval,
    pub directions: Vec<(Interval, Direction)>,
    pub label: &'static str,
}

#[derive(Debug, Clone)]
pub struct GapValue {
    pub t: Real,
    pub value: Real,
}

fn domain(op: &'static str, detail: String) -> Error {
    Error::Domain { op, detail }
}

/// `f(x) = pi + (4+pi)x/2 - 2(x+2) atan(sqrt(x+1))` for `x >= -1`.
pub fn f_cb(x: &Real, p: Precision) -> Result<Real> {
    let x = x.with_precision(p);
    let one = Real::one(p);
    let shifted = &x + &one;
    if shifted.is_negative() {
        return Err(domain("f", format!("x = {x} is below -1")));
    }
    let pi = Real::pi(p);
    let linear = (&pi + Real::from_i64(4, p)) * &x / Real::from_i64(2, p);
    let arc = (&x + Real::from_i64(2, p)).scale(2) * shifted.sqrt().atan();
    Ok(pi + linear - arc)
}

/// `H(t) = f(t^2 - 1)`.
pub fn h_value(t: &Real, p: Precision) -> Result<Real> {
    let t = t.with_precision(p);
    f_cb(&(&t * &t - Real::one(p)), p)
}

/// `ln(1 + x)` for `x > -1`.
pub fn ln1p(x: &Real, p: Precision) -> Result<Real> {
    let arg = x.with_precision(p) + Real::one(p);
    if !arg.is_positive() {
        return Err(domain("ln1p", format!("x = {x} is not above -1")));
    }
    Ok(arg.ln())
}

pub fn bound_value(id: BoundId, x: &Real, p: Precision) -> Result<Real> {
    let spec = id.spec();
    if !spec.region.contains(x) {
        return Err(domain("bound", format!("x = {x} is outside the region of {id}")));
    }
    eval(&spec.formula, x, p)
}

/// `R(t) = 2t ln t - f(t^2 - 1)`.
pub fn gap_r(t: &Real, p: Precision) -> Result<GapValue> {
    let t = t.with_precision(p);
    if !t.is_positive() {
        return Err(domain("R", format!("t = {t} is not positive")));
    }
    let value = t.scale(2) * t.ln() - h_value(&t, p)?;
    Ok(GapValue { t, value })
}

/// Second derivative (by jet) of `ln t - ((4+pi)t/2 - 2t atan t - 2)` paired
/// with the closed form `-(t^2-1)^2 t^-2 (t^2+1)^-2`.
pub fn phi_identity(t: &Real, p: Precision) -> Result<(Real, Real)> {
    let t = t.with_precision(p);
    if !t.is_positive() {
        return Err(domain("phi", format!("t = {t} is not positive")));
    }
    let phi = parse("ln(t) - ((1/2)*(4+pi)*t - 2*t*atan(t) - 2)").expect("phi parses");
    let lhs = jet(&phi, &t, 2, p)?.derivative(2).expect("order 2");
    let one = Real::one(p);
    let t2 = &t * &t;
    let num = (&t2 - &one).powi(2);
    let den = &t2 * (&t2 + &one).powi(2);
    Ok((lhs, -(num / den)))
}

/// Closed-form n-th derivative of `atan` at `x`:
/// `(-1)^(n-1) (n-1)! (1+x^2)^(-n/2) sin(n pi/2 - n atan x)`.
pub fn atan_deriv(n: usize, x: &Real, p: Precision) -> Result<Real> {
    if n == 0 {
        return Err(Error::InvalidArgument("arctan derivative order must be at least 1".into()));
    }
    let x = x.with_precision(p);
    let nn = n as i64;
    let radius = (Real::one(p) + &x * &x).sqrt();
    let angle = (Real::pi(p).scale(nn) / Real::from_i64(2, p)) - x.atan().scale(nn);
    let mag = factorial(n - 1, p) * radius.powi(-nn) * angle.sin();
    Ok(if n % 2 == 1 { mag } else { -mag })
}

/// n-th derivative of `H` at `t > 0`. For `n >= 4` this is the Leibniz
/// expansion `-4 [t atan^(n-1)(t) + (n-1) atan^(n-2)(t)]`.
pub fn h_deriv(n: usize, t: &Real, p: Precision) -> Result<Real> {
    let t = t.with_precision(p);
    if !t.is_positive() {
        return Err(domain("H derivative", format!("t = {t} is not positive")));
    }
    let one = Real::one(p);
    let four_pi = Real::pi(p) + Real::from_i64(4, p);
    let t2p1 = &one + &t * &t;
    Ok(match n {
        0 => h_value(&t, p)?,
        1 => &four_pi * &t - (&t * t.atan()).scale(4) - Real::from_i64(2, p),
        2 => four_pi - t.atan().scale(4) - t.scale(4) / &t2p1,
        3 => Real::from_i64(-8, p) / t2p1.powi(2),
        _ => {
            let lead = &t * atan_deriv(n - 1, &t, p)?;
            let tail = atan_deriv(n - 2, &t, p)?.scale(n as i64 - 1);
            (lead + tail).scale(-4)
        }
    })
}

/// `4 [t atan^(n)(t) + (n-1) atan^(n-1)(t)]` through the closed-form arctan
/// derivative: the literal reading of `Q^(n)(t) - P^(n)(t)`. Differs from the
/// derived `-H^(n)(t)`.
pub fn q_offset_paper_literal(n: usize, t: &Real, p: Precision) -> Result<Real> {
    if n < 3 {
        return Err(Error::InvalidArgument("the literal closed form needs n >= 3".into()));
    }
    let t = t.with_precision(p);
    let nn = n as i64;
    let radius_sq = Real::one(p) + &t * &t;
    let atan_t = t.atan();
    let half_pi = Real::pi(p) / Real::from_i64(2, p);
    let fact = factorial(n - 1, p);
    // t (-1)^(n-1) (n-1)! / (1+t^2)^(n/2) sin(n pi/2 - n atan t)
    let first = {
        let s = (half_pi.scale(nn) - atan_t.scale(nn)).sin();
        let v = &t * &fact * radius_sq.sqrt().powi(-nn) * s;
        if n % 2 == 1 {
            v
        } else {
            -v
        }
    };
    // (-1)^n (n-1)! / (1+t^2)^((n-1)/2) sin((n-1) pi/2 - (n-1) atan t)
    let second = {
        let s = (half_pi.scale(nn - 1) - atan_t.scale(nn - 1)).sin();
        let v = &fact * radius_sq.sqrt().powi(-(nn - 1)) * s;
        if n.is_multiple_of(2) {
            v
        } else {
            -v
        }
    };
    Ok((first + second).scale(4))
}

/// `Q^(n)(t) - P^(n)(t) = -H^(n)(t)`.
pub fn q_offset_derived(n: usize, t: &Real, p: Precision) -> Result<Real> {
    Ok(-h_deriv(n, t, p)?)
}

/// `H(t) - eps (t-1)^5`.
pub fn refined_local(t: &Real, eps: &Real, p: Precision) -> Result<Real> {
    let t = t.with_precision(p);
    if !t.is_positive() {
        return Err(domain("refined bound", format!("t = {t} is not positive")));
    }
    if eps.is_negative() {
        return Err(Error::InvalidArgument(format!("eps = {eps} is negative")));
    }
    Ok(h_value(&t, p)? - eps.with_precision(p) * (&t - Real::one(p)).powi(5))
}

/// Expression form of [`refined_local`] with `eps = num/den`.
pub fn refined_local_expr(num: i64, den: i64) -> Expr {
    parse(&format!("H(t) - ({num}/{den})*(t-1)^5")).expect("refined bound parses")
}

/// One row of the bound atlas: `ln(1+x)` and every bound defined at `x`.
#[derive(Debug, Clone)]
pub struct AtlasRow {
    pub x: Real,
    pub ln1p: Real,
    pub bounds: Vec<(BoundId, Option<Real>)>,
}

pub fn atlas_row(x: &Real, p: Precision) -> Result<AtlasRow> {
    let ln = ln1p(x, p)?;
    let bounds = BoundId::ALL
        .into_iter()
        .map(|id| {
            let v = if id.spec().region.contains(x) { Some(bound_value(id, x, p)?) } else { None };
            Ok((id, v))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AtlasRow { x: x.with_precision(p), ln1p: ln, bounds })
}

/// First failure of `ln(1+x) <= CB(x) <= classical(x)` beyond `slack`.
#[derive(Debug, Clone)]
pub struct ChainViolation {
    pub x: Real,
    pub lower: &'static str,
    pub upper: &'static str,
    pub lhs: Real,
    pub rhs: Real,
}

/// Checks the chain at one `x >= 0`; `slack` is the allowed negative margin.
pub fn check_chain(x: &Real, slack: &Real, p: Precision) -> Result<Option<ChainViolation>> {
    let ln = ln1p(x, p)?;
    let cb = bound_value(BoundId::Cb, x, p)?;
    let fails = |lhs: &Real, rhs: &Real| (rhs - lhs) < -slack;
    if fails(&ln, &cb) {
        return Ok(Some(ChainViolation { x: x.clone(), lower: "ln1p", upper: "cb", lhs: ln, rhs: cb }));
    }
    for id in BoundId::CLASSICAL {
        let v = bound_value(id, x, p)?;
        if fails(&cb, &v) {
            return Ok(Some(ChainViolation { x: x.clone(), lower: "cb", upper: id.name(), lhs: cb, rhs: v }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Precision {
        Precision::default()
    }

    fn r(v: f64) -> Real {
        Real::from_f64(v, p())
    }

    fn close(a: &Real, b: f64, tol: f64) -> bool {
        (a.to_f64() - b).abs() <= tol
    }

    #[test]
    fn f_cb_anchor_values() {
        assert!(f_cb(&r(0.0), p()).unwrap().abs() < p().ten_pow_neg(60));
        let half_pi_minus_two = Real::pi(p()) / Real::from_i64(2, p()) - Real::from_i64(2, p());
        assert!((f_cb(&r(-1.0), p()).unwrap() - half_pi_minus_two).abs() < p().ten_pow_neg(60));
        // mpmath, 60 digits
        assert_eq!(f_cb(&r(3.0), p()).unwrap().to_decimal(40), "2.782494456033578065985953856413386809792e0");
        assert!(f_cb(&r(-1.5), p()).is_err());
    }

    #[test]
    fn bound_values() {
        assert_eq!(bound_value(BoundId::Pade, &r(3.0), p()).unwrap().to_decimal(40), "1.875e0");
        let cb = bound_value(BoundId::Cb, &r(3.0), p()).unwrap();
        assert_eq!(cb.to_decimal(30), "1.39124722801678903299297692821e0");
        assert!(ln1p(&r(3.0), p()).unwrap() <= cb);
        assert!(bound_value(BoundId::Karamata, &r(0.0), p()).unwrap().is_zero());
        assert!(bound_value(BoundId::Sqrt, &r(-0.5), p()).is_err());
        assert!(bound_value(BoundId::Cb, &r(-0.5), p()).unwrap() <= ln1p(&r(-0.5), p()).unwrap());
        assert!(bound_value(BoundId::Cb, &r(-1.0), p()).is_err());
    }

    #[test]
    fn gap_function_values() {
        assert!(gap_r(&r(1.0), p()).unwrap().value.abs() < p().ten_pow_neg(40));
        let near_zero = gap_r(&r(1e-8), p()).unwrap().value;
        assert!(close(&near_zero, 2.0 - std::f64::consts::FRAC_PI_2, 1e-3));
        // mpmath: -0.0099057337937968283170...
        assert!(close(&gap_r(&r(2.0), p()).unwrap().value, -0.009906, 1e-5));
        assert!(gap_r(&r(0.0), p()).is_err());
    }

    #[test]
    fn phi_identity_points() {
        let (lhs, rhs) = phi_identity(&r(1.0), p()).unwrap();
        assert!(lhs.abs() < p().ten_pow_neg(40) && rhs.is_zero());
        let (lhs, rhs) = phi_identity(&r(2.0), p()).unwrap();
        assert!((&rhs + Real::ratio(9, 100, p())).abs() < p().ten_pow_neg(45));
        assert!((lhs - rhs).abs() < p().ten_pow_neg(12));
        let (lhs, rhs) = phi_identity(&r(0.5), p()).unwrap();
        assert!(close(&rhs, -1.44, 1e-14));
        assert!((lhs - rhs).abs() < p().ten_pow_neg(12));
    }

    #[test]
    fn atan_derivative_anchors() {
        assert!(close(&atan_deriv(1, &r(0.0), p()).unwrap(), 1.0, 1e-40));
        assert!(close(&atan_deriv(2, &r(1.0), p()).unwrap(), -0.5, 1e-40));
        assert!(close(&atan_deriv(3, &r(0.0), p()).unwrap(), -2.0, 1e-40));
        assert!(atan_deriv(0, &r(0.0), p()).is_err());
    }

    #[test]
    fn h_derivatives_at_one() {
        let expected = [0.0, 2.0, 2.0, -2.0, 4.0, -8.0, 12.0, 12.0];
        for (n, want) in expected.iter().enumerate() {
            let got = h_deriv(n, &r(1.0), p()).unwrap();
            assert!((got - Real::from_f64(*want, p())).abs() < p().ten_pow_neg(40), "n = {n}");
        }
        assert!(h_deriv(2, &r(0.0), p()).is_err());
    }

    #[test]
    fn q_offsets_disagree_at_five() {
        let one = r(1.0);
        let literal = q_offset_paper_literal(5, &one, p()).unwrap();
        let derived = q_offset_derived(5, &one, p()).unwrap();
        assert!(close(&literal, -12.0, 1e-40));
        assert!(close(&derived, 8.0, 1e-40));
    }

    #[test]
    fn refined_local_values() {
        let eps = Real::ratio(1, 60, p());
        assert!(refined_local(&r(1.0), &eps, p()).unwrap().abs() < p().ten_pow_neg(60));
        let t = Real::ratio(6, 5, p());
        let v = refined_local(&t, &eps, p()).unwrap();
        let h = h_value(&t, p()).unwrap();
        let two_t_ln_t = t.scale(2) * t.ln();
        assert!(two_t_ln_t <= v && v <= h);
        // mpmath: H(1.2) - 0.2^5/60 = 0.43757441712703051279...
        assert_eq!(v.to_decimal(20), "4.3757441712703051279e-1");
        assert!(refined_local(&t, &Real::zero(p()), p()).unwrap() == h);
        assert!(refined_local(&r(-1.0), &eps, p()).is_err());
    }

    #[test]
    fn chain_detects_swapped_slack() {
        let slack = p().ten_pow_neg(30);
        assert!(check_chain(&r(3.0), &slack, p()).unwrap().is_none());
    }
}
