use logbound::bounds::{h_value, refined_local_expr};
use logbound::certifier::{certify, certify_conditions, Case, Certificate, ConstantMode, Pattern};
use logbound::eval::eval;
use logbound::grid::linspace;
use logbound::{parse, Expr, Precision, Real};
use proptest::prelude::*;

fn p() -> Precision {
    Precision::default()
}

fn a09() -> Real {
    Real::from_f64(0.9, p())
}

/// Evaluates the local pattern of `cert` on `points` points of `[1-r, 1+r]` at 100 digits.
fn pattern_holds(e: &Expr, cert: &Certificate, points: usize) -> Result<(), String> {
    let hp = Precision::new(100).unwrap();
    let r = cert.radius.as_ref().ok_or("no radius")?.with_precision(hp);
    let one = Real::one(hp);
    let slack = hp.ten_pow_neg(90);
    for t in linspace(&(&one - &r), &(&one + &r), points, hp) {
        let v = eval(e, &t, hp).map_err(|e| e.to_string())?;
        let side = if t >= one { 1 } else { -1 };
        // Right of 1 the candidate sits above 2t ln t (and below H for drr); mirrored on the left.
        let g = &v - t.scale(2) * t.ln();
        if g.signum() * side < 0 && g.abs() > slack {
            return Err(format!("2t ln t side fails at t = {}", t.to_decimal(20)));
        }
        if cert.pattern == Some(Pattern::Drr) {
            let q = &v - h_value(&t, hp).map_err(|e| e.to_string())?;
            if q.signum() * side > 0 && q.abs() > slack {
                return Err(format!("H side fails at t = {}", t.to_decimal(20)));
            }
        }
    }
    Ok(())
}

#[test]
fn refined_bound_certificates_are_sound() {
    for den in [120, 60, 40] {
        let e = refined_local_expr(1, den);
        let cert = certify(&e, &a09(), 12, ConstantMode::Derived, p()).unwrap();
        assert_eq!(cert.case, Some(Case::IV), "eps = 1/{den}");
        let r = cert.radius.clone().unwrap();
        assert!(r.is_positive() && r <= a09());
        pattern_holds(&e, &cert, 2000).unwrap_or_else(|m| panic!("eps = 1/{den}: {m}"));
    }
}

#[test]
fn large_eps_is_rejected() {
    for den in [30, 20] {
        let cert = certify(&refined_local_expr(1, den), &a09(), 12, ConstantMode::Derived, p()).unwrap();
        assert!(cert.case.is_none(), "eps = 1/{den}");
        assert!(cert.radius.is_none());
        assert!(cert.conditions.iter().any(|c| !c.pass));
    }
}

#[test]
fn quadratic_is_case_one() {
    let e = parse("2*(t-1) + (t-1)^2").unwrap();
    let cert = certify(&e, &a09(), 12, ConstantMode::Derived, p()).unwrap();
    assert_eq!((cert.case, cert.n, cert.pattern), (Some(Case::I), Some(1), Some(Pattern::Dr)));
    pattern_holds(&e, &cert, 2000).unwrap();
}

#[test]
fn pattern_fails_beyond_radius() {
    // The radius is tight: the pattern breaks somewhere slightly past it, or it reached a.
    let e = refined_local_expr(1, 40);
    let mut cert = certify(&e, &a09(), 12, ConstantMode::Derived, p()).unwrap();
    let r = cert.radius.clone().unwrap();
    if r < Real::from_f64(0.89, p()) {
        cert.radius = Some(&r * Real::from_f64(1.1, p()));
        assert!(pattern_holds(&e, &cert, 4000).is_err());
    }
}

#[test]
fn paper_literal_mode_reports_both_constant_sets() {
    let e = parse("H(t)").unwrap();
    let derived = certify_conditions(&e, &a09(), 12, ConstantMode::Derived, p()).unwrap();
    let literal = certify_conditions(&e, &a09(), 12, ConstantMode::PaperLiteral, p()).unwrap();
    for cert in [&derived, &literal] {
        let q5 = &cert.case_iii_constants[0];
        assert_eq!(q5.j, 5);
        assert_eq!(q5.derived.to_decimal(20), "8e0");
        assert_eq!(q5.paper_literal.to_decimal(20), "-1.2e1");
    }
}

#[test]
fn a_outside_unit_interval_is_rejected() {
    let e = parse("t").unwrap();
    for a in [0.0, 1.0, -0.5, 2.0] {
        assert!(certify(&e, &Real::from_f64(a, p()), 12, ConstantMode::Derived, p()).is_err());
    }
}

/// Taylor polynomial of `2t ln t` at 1 through `(t-1)^(n+1)`, plus
/// `(c_n + bump) (t-1)^(n+2)` where `c_n` is the next Taylor coefficient.
fn case_one_family(n: usize, bump: &str) -> String {
    let mut s = String::from("2*(t-1)");
    for j in 2..=n + 2 {
        let sign = if j % 2 == 0 { "+" } else { "-" };
        let coeff = format!("(2/{})", j * (j - 1));
        if j == n + 2 {
            s.push_str(&format!(" + ({sign}{coeff} + {bump})*(t-1)^{j}"));
        } else {
            s.push_str(&format!(" {sign} {coeff}*(t-1)^{j}"));
        }
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn case_one_family_certifies(k in 0usize..4, bump in 1u32..30) {
        let n = 2 * k + 1;
        // bump/10 >= 1/10 keeps the fifth derivative outside the case IV window for n = 3.
        let text = case_one_family(n, &format!("{bump}/10"));
        let e = parse(&text).unwrap();
        let a = Real::from_f64(0.5, p());
        let cert = certify(&e, &a, 12, ConstantMode::Derived, p()).unwrap();
        prop_assert_eq!(cert.case, Some(Case::I), "{}", text);
        prop_assert_eq!(cert.n, Some(n));
        prop_assert!(cert.radius.as_ref().unwrap().is_positive());
        if let Err(m) = pattern_holds(&e, &cert, 2000) {
            return Err(TestCaseError::fail(format!("{text}: {m}")));
        }
    }

    /// Certification of `H - eps (t-1)^5` is downward closed in eps and switches off at 1/30.
    #[test]
    fn certification_monotone_in_eps(d1 in 2i64..400, d2 in 2i64..400) {
        let (small, large) = (d1.max(d2), d1.min(d2));
        let ok = |den: i64| {
            certify_conditions(&refined_local_expr(1, den), &a09(), 12, ConstantMode::Derived, p())
                .unwrap()
                .case
        };
        let (cs, cl) = (ok(small), ok(large));
        prop_assert_eq!(cs.is_some(), small > 30);
        prop_assert_eq!(cl.is_some(), large > 30);
        prop_assert!(cl.is_none() || cs.is_some());
        if let Some(c) = cs {
            prop_assert_eq!(c, Case::IV);
        }
    }
}
