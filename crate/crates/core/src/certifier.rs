//! Derivative-condition certificates for local bounds of `2t ln t` near `t = 1`.
//!
//! With `G(t) = P(t) - 2t ln t` and `Q(t) = P(t) - H(t)`, each case reduces to
//! the sign pattern of a derivative jet at `t = 1`:
//!
//! * case I (odd `n`): `G'(1) >= 0`, `G^(j)(1) = 0` for `2 <= j <= n+1`,
//!   `G^(n+2)(1) > 0`, giving `2t ln t <= P` right of 1 and `>=` left of 1;
//! * cases II, III (even `n >= 6`) and IV additionally pin `Q`, giving
//!   `2t ln t <= P <= H` right of 1 and the reverse left of 1.
//!
//! `G^(j)(1) = P^(j)(1) + c_j` with `c_1 = -2` and `c_j = 2(-1)^(j+1)(j-2)!`.

use std::fmt;

use serde::Serialize;

use crate::bounds::{h_value, q_offset_derived, q_offset_paper_literal};
use crate::error::{Error, Result};
use crate::eval::eval;
use crate::expr::Expr;
use crate::jet::{factorial, jet, Jet};
use crate::real::{Precision, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case {
    I,
    II,
    III,
    IV,
}

impl Case {
    pub fn pattern(self) -> Pattern {
        match self {
            Case::I => Pattern::Dr,
            _ => Pattern::Drr,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Case::I => "I",
            Case::II => "II",
            Case::III => "III",
            Case::IV => "IV",
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Local inequality pattern implied by a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pattern {
    /// `2t ln t <= P(t)` on `[1, 1+r]`, `>=` on `[1-r, 1]`.
    Dr,
    /// `2t ln t <= P(t) <= H(t)` on `[1, 1+r]`, reversed on `[1-r, 1]`.
    Drr,
}

/// Which constants the case-III equalities use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantMode {
    /// `q_j = -H^(j)(1)`, i.e. the conditions read `Q^(j)(1) = 0`.
    #[default]
    Derived,
    /// `q_j = 4 [atan^(j)(1) + (j-1) atan^(j-1)(1)]`, the literal closed form.
    PaperLiteral,
}

impl ConstantMode {
    pub fn name(self) -> &'static str {
        match self {
            ConstantMode::Derived => "derived",
            ConstantMode::PaperLiteral => "paper-literal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionKind {
    Equality,
    AtLeast,
    GreaterThan,
    LessThan,
}

#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub label: String,
    pub kind: ConditionKind,
    pub target: Real,
    pub actual: Real,
    /// `actual - target`, except `target - actual` for `LessThan`.
    pub margin: Real,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct Tolerances {
    pub eq: Real,
    pub strict: Real,
}

impl Tolerances {
    /// `10^-(digits - 10)` for both kinds.
    pub fn for_precision(p: Precision) -> Self {
        let t = p.ten_pow_neg(p.digits() as i64 - 10);
        Self { eq: t.clone(), strict: t }
    }
}

fn condition(label: String, kind: ConditionKind, actual: Real, target: Real, tol: &Tolerances) -> ConditionReport {
    let margin = match kind {
        ConditionKind::LessThan => &target - &actual,
        _ => &actual - &target,
    };
    let pass = match kind {
        ConditionKind::Equality => margin.abs() <= tol.eq,
        ConditionKind::AtLeast => margin >= -&tol.eq,
        ConditionKind::GreaterThan | ConditionKind::LessThan => margin > tol.strict,
    };
    ConditionReport { label, kind, target, actual, margin, pass }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Min,
    Max,
    None,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtremumVerdict {
    pub kind: ExtremumKind,
    pub first_nonzero_order: Option<usize>,
}

/// Classifies a critical point from derivatives `d_1..d_k`: the first entry
/// above `tol` decides; an even order gives an extremum by its sign.
pub fn local_extremum_test(derivs: &[Real], tol: &Real) -> Result<ExtremumVerdict> {
    if derivs.is_empty() {
        return Err(Error::InvalidArgument("derivative list is empty".into()));
    }
    let Some(idx) = derivs.iter().position(|d| d.abs() > *tol) else {
        return Ok(ExtremumVerdict { kind: ExtremumKind::Inconclusive, first_nonzero_order: None });
    };
    let order = idx + 1;
    let kind = if order % 2 == 1 {
        ExtremumKind::None
    } else if derivs[idx].is_positive() {
        ExtremumKind::Min
    } else {
        ExtremumKind::Max
    };
    Ok(ExtremumVerdict { kind, first_nonzero_order: Some(order) })
}

/// `c_j` in `G^(j)(1) = P^(j)(1) + c_j`.
pub fn g_constant(j: usize, p: Precision) -> Real {
    match j {
        0 => Real::zero(p),
        1 => Real::from_i64(-2, p),
        _ => {
            let v = factorial(j - 2, p).scale(2);
            if j % 2 == 1 {
                v
            } else {
                -v
            }
        }
    }
}

/// `q_j` in the case-III conditions `P^(j)(1) + q_j = 0`.
pub fn q_constant(j: usize, mode: ConstantMode, p: Precision) -> Result<Real> {
    let one = Real::one(p);
    match mode {
        ConstantMode::Derived => q_offset_derived(j, &one, p),
        ConstantMode::PaperLiteral => {
            // At t = 1 the sines are exact zeros for some j; drop the rounding residue.
            let v = q_offset_paper_literal(j, &one, p)?;
            Ok(if v.abs() < p.ten_pow_neg(p.digits() as i64) { Real::zero(p) } else { v })
        }
    }
}

/// A candidate `P` with its jet at `t = 1`.
#[derive(Debug, Clone)]
pub struct CandidateJet {
    pub expr: Expr,
    pub jet_at_1: Jet,
    pub a: Real,
}

impl CandidateJet {
    pub fn new(expr: Expr, a: &Real, order: usize, p: Precision) -> Result<Self> {
        let a = a.with_precision(p);
        if !(a.is_positive() && a < Real::one(p)) {
            return Err(Error::InvalidArgument(format!("a = {a} must lie in (0, 1)")));
        }
        let jet_at_1 = jet(&expr, &Real::one(p), order, p)?;
        Ok(Self { expr, jet_at_1, a })
    }

    fn precision(&self) -> Precision {
        self.jet_at_1.precision()
    }

    fn deriv(&self, j: usize) -> Result<Real> {
        self.jet_at_1.derivative(j).ok_or(Error::InsufficientOrder { have: self.jet_at_1.order(), need: j })
    }

    fn require_order(&self, need: usize) -> Result<()> {
        let have = self.jet_at_1.order();
        if have < need {
            return Err(Error::InsufficientOrder { have, need });
        }
        Ok(())
    }
}

fn prime_label(j: usize) -> String {
    match j {
        0 => "P(1)".into(),
        1 => "P'(1)".into(),
        2 => "P''(1)".into(),
        3 => "P'''(1)".into(),
        _ => format!("P^({j})(1)"),
    }
}

/// One report per condition of the requested case.
pub fn check_case(c: &CandidateJet, case: Case, n: usize, mode: ConstantMode) -> Result<Vec<ConditionReport>> {
    let p = c.precision();
    let tol = Tolerances::for_precision(p);
    match case {
        Case::I if n.is_multiple_of(2) || n == 0 => {
            return Err(Error::InvalidCase(format!("case I needs an odd n, got {n}")));
        }
        Case::II | Case::III if n % 2 == 1 || n < 6 => {
            return Err(Error::InvalidCase(format!("case {case} needs an even n >= 6, got {n}")));
        }
        _ => {}
    }
    let need = match case {
        Case::I => n + 2,
        Case::II | Case::III => n + 1,
        Case::IV => 5,
    };
    c.require_order(need)?;

    let mut out = vec![condition("P(1) = 0".into(), ConditionKind::Equality, c.deriv(0)?, Real::zero(p), &tol)];
    let g_eq = |j: usize| -> Result<ConditionReport> {
        Ok(condition(format!("j={j} equality"), ConditionKind::Equality, c.deriv(j)?, -g_constant(j, p), &tol))
    };
    match case {
        Case::I => {
            out.push(condition("P'(1) >= 2".into(), ConditionKind::AtLeast, c.deriv(1)?, Real::from_i64(2, p), &tol));
            for j in 2..=n + 1 {
                out.push(g_eq(j)?);
            }
            out.push(condition(
                format!("j={} strict > 0", n + 2),
                ConditionKind::GreaterThan,
                c.deriv(n + 2)?,
                -g_constant(n + 2, p),
                &tol,
            ));
        }
        Case::II => {
            for j in 1..=n {
                out.push(g_eq(j)?);
            }
            out.push(condition(
                format!("j={} strict > 0", n + 1),
                ConditionKind::GreaterThan,
                c.deriv(n + 1)?,
                -g_constant(n + 1, p),
                &tol,
            ));
        }
        Case::III => {
            for j in 1..=4 {
                out.push(g_eq(j)?);
            }
            for j in 5..=n {
                out.push(condition(
                    format!("j={j} Q-equality ({})", mode.name()),
                    ConditionKind::Equality,
                    c.deriv(j)?,
                    -q_constant(j, mode, p)?,
                    &tol,
                ));
            }
            out.push(condition(
                format!("j={} Q-strict < 0 ({})", n + 1, mode.name()),
                ConditionKind::LessThan,
                c.deriv(n + 1)?,
                -q_constant(n + 1, mode, p)?,
                &tol,
            ));
        }
        Case::IV => {
            for j in 1..=4 {
                out.push(g_eq(j)?);
            }
            out.push(condition(
                format!("{} > -12", prime_label(5)),
                ConditionKind::GreaterThan,
                c.deriv(5)?,
                Real::from_i64(-12, p),
                &tol,
            ));
            out.push(condition(
                format!("{} < -8", prime_label(5)),
                ConditionKind::LessThan,
                c.deriv(5)?,
                Real::from_i64(-8, p),
                &tol,
            ));
        }
    }
    Ok(out)
}

/// Case-III constant `q_j` under both readings.
#[derive(Debug, Clone)]
pub struct ConstantPair {
    pub j: usize,
    pub derived: Real,
    pub paper_literal: Real,
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub case: Option<Case>,
    pub n: Option<usize>,
    pub conditions: Vec<ConditionReport>,
    pub pattern: Option<Pattern>,
    pub radius: Option<Real>,
    pub a: Real,
    pub precision: Precision,
    pub mode: ConstantMode,
    /// For an uncertified candidate, the attempt with the fewest failures.
    pub nearest: Option<(Case, Option<usize>)>,
    pub case_iii_constants: Vec<ConstantPair>,
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        self.case.is_some()
    }
}

/// Default largest `n` tried.
pub const DEFAULT_MAX_N: usize = 12;

/// Checks the cases in the order IV, I (odd n), II, III (even n >= 6) and
/// returns the first whose conditions all pass. No radius is computed.
pub fn certify_conditions(e: &Expr, a: &Real, max_n: usize, mode: ConstantMode, p: Precision) -> Result<Certificate> {
    if max_n == 0 {
        return Err(Error::InvalidArgument("max_n must be at least 1".into()));
    }
    let order = (max_n + 2).max(5);
    let cand = CandidateJet::new(e.clone(), a, order, p)?;

    let mut attempts: Vec<(Case, Option<usize>)> = vec![(Case::IV, None)];
    attempts.extend((1..=max_n).step_by(2).map(|n| (Case::I, Some(n))));
    attempts.extend((6..=max_n).step_by(2).map(|n| (Case::II, Some(n))));
    attempts.extend((6..=max_n).step_by(2).map(|n| (Case::III, Some(n))));

    let mut constants = Vec::new();
    for j in 5..=order {
        constants.push(ConstantPair {
            j,
            derived: q_constant(j, ConstantMode::Derived, p)?,
            paper_literal: q_constant(j, ConstantMode::PaperLiteral, p)?,
        });
    }

    let mut nearest: Option<(usize, Case, Option<usize>, Vec<ConditionReport>)> = None;
    for (case, n) in attempts {
        let reports = check_case(&cand, case, n.unwrap_or(5), mode)?;
        let failures = reports.iter().filter(|r| !r.pass).count();
        if failures == 0 {
            return Ok(Certificate {
                case: Some(case),
                n,
                conditions: reports,
                pattern: Some(case.pattern()),
                radius: None,
                a: cand.a,
                precision: p,
                mode,
                nearest: None,
                case_iii_constants: constants,
            });
        }
        if nearest.as_ref().is_none_or(|(best, ..)| failures < *best) {
            nearest = Some((failures, case, n, reports));
        }
    }
    let (_, case, n, reports) = nearest.expect("at least one attempt");
    Ok(Certificate {
        case: None,
        n: None,
        conditions: reports,
        pattern: None,
        radius: None,
        a: cand.a,
        precision: p,
        mode,
        nearest: Some((case, n)),
        case_iii_constants: constants,
    })
}

/// Conditions plus a verified radius when a case applies.
pub fn certify(e: &Expr, a: &Real, max_n: usize, mode: ConstantMode, p: Precision) -> Result<Certificate> {
    let mut cert = certify_conditions(e, a, max_n, mode, p)?;
    if cert.is_certified() {
        cert.radius = Some(find_radius(e, &cert, p)?);
    }
    Ok(cert)
}

/// Points per side of the verification grid.
pub const RADIUS_GRID: usize = 1000;
const RADIUS_START: f64 = 1e-6;
const BISECTION_STEPS: usize = 60;

/// Sign conditions of the pattern at one point, up to an absolute slack.
pub struct PatternProbe<'a> {
    expr: &'a Expr,
    pattern: Pattern,
    slack: Real,
    p: Precision,
}

impl<'a> PatternProbe<'a> {
    pub fn new(expr: &'a Expr, pattern: Pattern, p: Precision) -> Self {
        Self { expr, pattern, slack: p.ten_pow_neg(p.digits() as i64), p }
    }

    /// True when the pattern holds at `t` (`t > 0`).
    pub fn holds(&self, t: &Real) -> Result<bool> {
        let p = self.p;
        let t = t.with_precision(p);
        let one = Real::one(p);
        let value = eval(self.expr, &t, p)?;
        let g = &value - t.scale(2) * t.ln();
        let q = if self.pattern == Pattern::Drr { Some(&value - h_value(&t, p)?) } else { None };
        let s = &self.slack;
        let ok = if t > one {
            g >= -s && q.is_none_or(|q| q <= *s)
        } else if t < one {
            g <= *s && q.is_none_or(|q| q >= -s)
        } else {
            g.abs() <= *s && q.is_none_or(|q| q.abs() <= *s)
        };
        Ok(ok)
    }

    /// First grid point of `[1-r, 1+r]` (`n` points) where the pattern fails.
    pub fn first_failure(&self, r: &Real, n: usize) -> Result<Option<Real>> {
        let one = Real::one(self.p);
        for t in crate::grid::linspace(&(&one - r), &(&one + r), n, self.p) {
            if !self.holds(&t)? {
                return Ok(Some(t));
            }
        }
        Ok(None)
    }
}

/// Largest verified `r <= a` for the certificate's pattern.
///
/// Each side is scanned outward from `1e-6` by doubling, the first failure is
/// bracketed by bisection, and the smaller side distance is then checked on
/// a [`RADIUS_GRID`]-point grid of `[1-r, 1+r]`, shrinking past any failure.
pub fn find_radius(e: &Expr, cert: &Certificate, p: Precision) -> Result<Real> {
    let pattern = match (cert.case, cert.pattern) {
        (Some(_), Some(pattern)) => pattern,
        _ => return Err(Error::Precondition("candidate has no certificate".into())),
    };
    let probe = PatternProbe::new(e, pattern, p);
    let a = cert.a.with_precision(p);
    let one = Real::one(p);
    let start = Real::from_f64(RADIUS_START, p).min(&a);

    let side = |sign: i64| -> Result<Real> {
        let at = |d: &Real| &one + d.scale(sign);
        if !probe.holds(&at(&start))? {
            return Err(Error::NoRadius(format!(
                "pattern fails at distance {start} on the {} side",
                if sign > 0 { "right" } else { "left" }
            )));
        }
        let mut good = start.clone();
        let mut bad = None;
        while good < a {
            let next = good.scale(2).min(&a);
            if probe.holds(&at(&next))? {
                good = next;
            } else {
                bad = Some(next);
                break;
            }
        }
        let Some(mut bad) = bad else { return Ok(a.clone()) };
        for _ in 0..BISECTION_STEPS {
            let mid = (&good + &bad).mul_pow2(-1);
            if probe.holds(&at(&mid))? {
                good = mid;
            } else {
                bad = mid;
            }
        }
        Ok(good)
    };

    let mut r = side(1)?.min(&side(-1)?);
    let steps = Real::from_i64(RADIUS_GRID as i64 - 1, p);
    for _ in 0..32 {
        match probe.first_failure(&r, RADIUS_GRID)? {
            None => return Ok(r),
            Some(t) => {
                let spacing = r.scale(2) / &steps;
                r = (&t - &one).abs() - spacing;
                if !r.is_positive() {
                    break;
                }
            }
        }
    }
    Err(Error::NoRadius("grid verification kept failing while shrinking".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::refined_local_expr;
    use crate::expr::parse;

    fn p() -> Precision {
        Precision::default()
    }

    fn reals(v: &[f64]) -> Vec<Real> {
        v.iter().map(|&x| Real::from_f64(x, p())).collect()
    }

    #[test]
    fn extremum_classification() {
        let tol = p().ten_pow_neg(30);
        let v = local_extremum_test(&reals(&[0.0, 2.0]), &tol).unwrap();
        assert_eq!(v, ExtremumVerdict { kind: ExtremumKind::Min, first_nonzero_order: Some(2) });
        let v = local_extremum_test(&reals(&[0.0, 0.0, -6.0]), &tol).unwrap();
        assert_eq!(v.kind, ExtremumKind::None);
        let v = local_extremum_test(&reals(&[0.0, 0.0, 0.0, 5.0]), &tol).unwrap();
        assert_eq!(v, ExtremumVerdict { kind: ExtremumKind::Min, first_nonzero_order: Some(4) });
        let v = local_extremum_test(&reals(&[0.0, -1.0]), &tol).unwrap();
        assert_eq!(v.kind, ExtremumKind::Max);
        let v = local_extremum_test(&reals(&[0.0, 0.0]), &tol).unwrap();
        assert_eq!(v.kind, ExtremumKind::Inconclusive);
        assert!(local_extremum_test(&[], &tol).is_err());
    }

    #[test]
    fn g_constants() {
        let got: Vec<f64> = (1..=6).map(|j| g_constant(j, p()).to_f64()).collect();
        assert_eq!(got, vec![-2.0, -2.0, 2.0, -4.0, 12.0, -48.0]);
    }

    fn candidate(text: &str) -> CandidateJet {
        CandidateJet::new(parse(text).unwrap(), &Real::from_f64(0.9, p()), 9, p()).unwrap()
    }

    #[test]
    fn case_one_quadratic() {
        let c = candidate("2*(t-1) + (t-1)^2");
        let reports = check_case(&c, Case::I, 1, ConstantMode::Derived).unwrap();
        assert!(reports.iter().all(|r| r.pass), "{reports:?}");
        let strict = reports.last().unwrap();
        assert_eq!(strict.margin.to_f64(), 2.0);
    }

    #[test]
    fn case_four_refined_bound() {
        let c = CandidateJet::new(refined_local_expr(1, 60), &Real::from_f64(0.9, p()), 5, p()).unwrap();
        let reports = check_case(&c, Case::IV, 5, ConstantMode::Derived).unwrap();
        assert!(reports.iter().all(|r| r.pass), "{reports:?}");
        assert!((reports.last().unwrap().actual.to_f64() + 10.0).abs() < 1e-30);

        let c = CandidateJet::new(refined_local_expr(1, 30), &Real::from_f64(0.9, p()), 5, p()).unwrap();
        let reports = check_case(&c, Case::IV, 5, ConstantMode::Derived).unwrap();
        let failing: Vec<_> = reports.iter().filter(|r| !r.pass).map(|r| r.label.as_str()).collect();
        assert_eq!(failing, vec!["P^(5)(1) > -12"]);
    }

    #[test]
    fn case_parameter_errors() {
        let c = candidate("2*(t-1)");
        assert!(matches!(check_case(&c, Case::I, 2, ConstantMode::Derived), Err(Error::InvalidCase(_))));
        assert!(matches!(check_case(&c, Case::II, 4, ConstantMode::Derived), Err(Error::InvalidCase(_))));
        assert!(matches!(
            check_case(&c, Case::III, 10, ConstantMode::Derived),
            Err(Error::InsufficientOrder { have: 9, need: 11 })
        ));
        assert!(CandidateJet::new(parse("t").unwrap(), &Real::one(p()), 3, p()).is_err());
    }

    #[test]
    fn case_three_constants_by_mode() {
        assert_eq!(q_constant(5, ConstantMode::Derived, p()).unwrap().to_decimal(20), "8e0");
        assert_eq!(q_constant(5, ConstantMode::PaperLiteral, p()).unwrap().to_decimal(20), "-1.2e1");
    }

    #[test]
    fn certify_search_order() {
        let a = Real::from_f64(0.9, p());
        let cert = certify_conditions(&refined_local_expr(1, 60), &a, 12, ConstantMode::Derived, p()).unwrap();
        assert_eq!(cert.case, Some(Case::IV));
        let quad = parse("2*(t-1) + (t-1)^2").unwrap();
        let cert = certify_conditions(&quad, &Real::from_f64(0.5, p()), 12, ConstantMode::Derived, p()).unwrap();
        assert_eq!((cert.case, cert.n), (Some(Case::I), Some(1)));
        // H itself only meets the one-sided pattern: case I with n = 3.
        let h = parse("H(t)").unwrap();
        let cert = certify_conditions(&h, &a, 12, ConstantMode::Derived, p()).unwrap();
        assert_eq!((cert.case, cert.n), (Some(Case::I), Some(3)));
        let cert = certify_conditions(&refined_local_expr(1, 20), &a, 12, ConstantMode::Derived, p()).unwrap();
        assert_eq!(cert.case, None);
        assert!(cert.nearest.is_some());
    }

    #[test]
    fn radius_requires_certificate() {
        let e = refined_local_expr(1, 20);
        let a = Real::from_f64(0.9, p());
        let cert = certify_conditions(&e, &a, 12, ConstantMode::Derived, p()).unwrap();
        assert!(matches!(find_radius(&e, &cert, p()), Err(Error::Precondition(_))));
    }

    #[test]
    fn radius_for_refined_bound() {
        let e = refined_local_expr(1, 60);
        let cert = certify(&e, &Real::from_f64(0.9, p()), 12, ConstantMode::Derived, p()).unwrap();
        let r = cert.radius.unwrap().to_f64();
        assert!((0.3..=0.9).contains(&r), "r = {r}");
        // Just past the radius the pattern must fail somewhere.
        let probe = PatternProbe::new(&e, Pattern::Drr, p());
        let beyond = Real::from_f64(r + 1e-3, p());
        let one = Real::one(p());
        assert!(!probe.holds(&(&one + &beyond)).unwrap() || !probe.holds(&(&one - &beyond)).unwrap());
    }
}
