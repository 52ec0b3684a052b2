//! Invariant suites run by `logbound selftest`.

use crate::bounds::{
    atan_deriv, bound_value, check_chain, f_cb, gap_r, h_deriv, phi_identity, refined_local_expr, BoundId,
};
use crate::certifier::{certify, local_extremum_test, q_constant, Certificate, ConstantMode, ExtremumKind, Pattern};
use crate::error::Result;
use crate::eval::eval;
use crate::expr::{parse, Expr};
use crate::fd::fd_derivative;
use crate::grid::{linspace, logspace};
use crate::jet::jet;
use crate::real::{Precision, Real};
use crate::sandwich::{
    find_witness, fit_sandwich, FitOptions, RationalFn, Region, RegionKind, WitnessBudget, WITNESS_MARGIN,
};

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

type Outcome = Result<(bool, String)>;

fn rel_close(a: &Real, b: &Real, rel: f64, abs: f64) -> bool {
    let p = Precision::default();
    let diff = (a - b).abs();
    let scale = b.abs().max(&Real::one(p));
    diff <= Real::from_f64(abs, p).max(&(Real::from_f64(rel, p) * scale))
}

const ROUND_TRIP: [&str; 8] = [
    "2*t*ln(t)",
    "pi + (1/2)*(4+pi)*x - 2*(x+2)*atan(sqrt(x+1))",
    "H(t) - (1/60)*(t-1)^5",
    "-x^2 + sin(x)/(1 + x^(-3))",
    "((x - 1) - (2 - x)) / (x*(3/7))",
    "ln(sqrt(x) + atan(x)^2)",
    "-(-(x))",
    "f(x)/sqrt(x+1)",
];

fn round_trip(_: Precision) -> Outcome {
    for text in ROUND_TRIP {
        let e = parse(text)?;
        let again = parse(&e.to_string())?;
        if again != e {
            return Ok((false, format!("`{text}` printed as `{e}` re-parses differently")));
        }
    }
    Ok((true, format!("{} expressions", ROUND_TRIP.len())))
}

const JET_CORPUS: [&str; 5] =
    ["ln(x) * atan(x)", "sqrt(x + 1) / (x^2 + 1)", "sin(ln(x)) - x^3", "H(x)", "atan(1/x) * ln(x + 2)^2"];

fn jet_vs_fd(p: Precision) -> Outcome {
    let mut count = 0;
    for text in JET_CORPUS {
        let e = parse(text)?;
        for c in [0.5, 1.3, 2.7] {
            let center = Real::from_f64(c, p);
            let j = jet(&e, &center, 6, p)?;
            for k in 1..=6 {
                let fd = fd_derivative(&e, &center, k, p)?;
                let d = j.derivative(k).expect("order 6");
                if !rel_close(&fd.value, &d, 1e-8, 1e-8) {
                    return Ok((false, format!("`{text}` at {c}, k = {k}: jet {d} vs fd {}", fd.value)));
                }
                count += 1;
            }
        }
    }
    Ok((true, format!("{count} derivative pairs")))
}

fn precision_stability(p: Precision) -> Outcome {
    let hi = p.plus(20);
    let tol = p.ten_pow_neg(p.digits() as i64 - 2);
    for text in JET_CORPUS {
        let e = parse(text)?;
        for c in [0.5, 1.3, 2.7] {
            let a = eval(&e, &Real::from_f64(c, p), p)?;
            let b = eval(&e, &Real::from_f64(c, hi), hi)?;
            let err = (&a.with_precision(hi) - &b).abs() / b.abs().max(&Real::one(hi));
            if err > tol.with_precision(hi) {
                return Ok((false, format!("`{text}` at {c}: relative difference {err}")));
            }
        }
    }
    Ok((true, format!("{} vs {} digits", p.digits(), hi.digits())))
}

fn bound_chain(p: Precision) -> Outcome {
    let slack = Real::from_f64(1e-30, p);
    let grid = logspace(&Real::from_f64(1e-6, p), &Real::from_f64(1e6, p), 500, p);
    for x in &grid {
        if let Some(v) = check_chain(x, &slack, p)? {
            return Ok((false, format!("x = {}: {} > {}", v.x, v.lower, v.upper)));
        }
    }
    Ok((true, "500 log-spaced points in [1e-6, 1e6]".into()))
}

fn t_ln_t_vs_h(p: Precision) -> Outcome {
    let slack = Real::from_f64(1e-30, p);
    let h = parse("H(t)")?;
    let right = linspace(&Real::one(p), &Real::from_i64(100, p), 500, p);
    let left = linspace(&Real::from_f64(1e-6, p), &Real::one(p), 500, p);
    for (grid, above) in [(right, true), (left, false)] {
        for t in &grid {
            let lhs = t.scale(2) * t.ln();
            let rhs = eval(&h, t, p)?;
            let ok = if above { &rhs - &lhs >= -&slack } else { &lhs - &rhs >= -&slack };
            if !ok {
                return Ok((false, format!("t = {t}: 2t ln t = {lhs}, H = {rhs}")));
            }
        }
    }
    Ok((true, "1000 points".into()))
}

fn gap_function(p: Precision) -> Outcome {
    let at1 = gap_r(&Real::one(p), p)?.value;
    if at1.abs() > p.ten_pow_neg(40) {
        return Ok((false, format!("R(1) = {at1}")));
    }
    let limit = Real::from_i64(2, p) - Real::pi(p).mul_pow2(-1);
    let near0 = gap_r(&Real::from_f64(1e-8, p), p)?.value;
    if (&near0 - &limit).abs() > Real::from_f64(1e-3, p) {
        return Ok((false, format!("R(1e-8) = {near0}")));
    }
    let at2 = gap_r(&Real::from_i64(2, p), p)?.value;
    if (at2.to_f64() + 0.009906).abs() > 1e-5 {
        return Ok((false, format!("R(2) = {at2}")));
    }
    let grid = linspace(&Real::from_f64(1e-3, p), &Real::from_i64(100, p), 500, p);
    let slack = Real::from_f64(1e-30, p);
    let mut prev: Option<Real> = None;
    for t in &grid {
        let v = gap_r(t, p)?.value;
        if let Some(pv) = &prev {
            if *pv < &v - &slack {
                return Ok((false, format!("R increases at t = {t}")));
            }
        }
        if *t <= Real::one(p) && (v < -&slack || v >= limit) {
            return Ok((false, format!("R({t}) = {v} outside [0, 2 - pi/2)")));
        }
        prev = Some(v);
    }
    Ok((true, "R(1) = 0, non-increasing, [0, 2 - pi/2) on (0, 1]".into()))
}

fn phi_second_derivative(p: Precision) -> Outcome {
    for t in [0.5, 1.0, 2.0, 3.0] {
        let (lhs, rhs) = phi_identity(&Real::from_f64(t, p), p)?;
        if (&lhs - &rhs).abs() > Real::from_f64(1e-12, p) {
            return Ok((false, format!("t = {t}: {lhs} vs {rhs}")));
        }
    }
    Ok((true, "4 points".into()))
}

fn atan_closed_form(p: Precision) -> Outcome {
    let e = parse("atan(x)")?;
    for x in [-2.0, -0.5, 0.0, 0.5, 1.0, 3.0] {
        let j = jet(&e, &Real::from_f64(x, p), 8, p)?;
        for n in 1..=8 {
            let closed = atan_deriv(n, &Real::from_f64(x, p), p)?;
            let d = j.derivative(n).expect("order 8");
            if !rel_close(&closed, &d, 1e-10, 1e-30) {
                return Ok((false, format!("n = {n}, x = {x}: {closed} vs {d}")));
            }
        }
    }
    Ok((true, "n <= 8 at 6 points".into()))
}

fn h_derivatives(p: Precision) -> Outcome {
    let h = parse("H(t)")?;
    for t in [0.5, 1.0, 2.0] {
        let c = Real::from_f64(t, p);
        let j = jet(&h, &c, 7, p)?;
        for n in 0..=7 {
            let closed = h_deriv(n, &c, p)?;
            let d = j.derivative(n).expect("order 7");
            if !rel_close(&closed, &d, 1e-8, 1e-8) {
                return Ok((false, format!("n = {n}, t = {t}: closed {closed} vs jet {d}")));
            }
            if n >= 1 {
                let fd = fd_derivative(&h, &c, n, p)?.value;
                if !rel_close(&fd, &d, 1e-8, 1e-8) {
                    return Ok((false, format!("n = {n}, t = {t}: fd {fd} vs jet {d}")));
                }
            }
        }
    }
    let expected = [0, 2, 2, -2, 4, -8];
    let one = Real::one(p);
    let j = jet(&h, &one, 5, p)?;
    for (n, &v) in expected.iter().enumerate() {
        let target = Real::from_i64(v, p);
        let from_jet = j.derivative(n).expect("order 5");
        let closed = h_deriv(n, &one, p)?;
        if (&from_jet - &target).abs() > Real::from_f64(1e-10, p)
            || (&closed - &target).abs() > Real::from_f64(1e-10, p)
        {
            return Ok((false, format!("H^({n})(1) = {from_jet}, expected {v}")));
        }
    }
    Ok((true, "n <= 7 at t in {0.5, 1, 2}; H^(0..5)(1) = 0, 2, 2, -2, 4, -8".into()))
}

fn asymptotic_ratio(p: Precision) -> Outcome {
    let t = Real::from_i64(10_000, p);
    let ratio = f_cb(&(&t * &t - Real::one(p)), p)? / (&t * &t);
    let limit = Real::from_i64(2, p) - Real::pi(p).mul_pow2(-1);
    let gap = (&ratio - &limit).abs();
    Ok((gap <= Real::from_f64(1e-3, p), format!("f(t^2-1)/t^2 at t = 1e4 is {}", ratio.to_decimal(12))))
}

/// Brute-force classification of `sum c_k (t - t0)^k` around `t0`.
fn brute_extremum(coeffs: &[f64]) -> ExtremumKind {
    let g = |h: f64| coeffs.iter().enumerate().skip(1).map(|(k, c)| c * h.powi(k as i32)).sum::<f64>();
    let mut kinds = Vec::new();
    for h in [1e-3, 1e-4, 1e-5] {
        let (l, r) = (g(-h), g(h));
        kinds.push(match (l > 0.0, r > 0.0, l < 0.0, r < 0.0) {
            (true, true, _, _) => ExtremumKind::Min,
            (_, _, true, true) => ExtremumKind::Max,
            _ => ExtremumKind::None,
        });
    }
    kinds[2]
}

fn extremum_test(p: Precision) -> Outcome {
    let corpus: [&[f64]; 6] = [
        &[0.0, 0.0, 1.0],
        &[0.0, 0.0, -2.0, 5.0],
        &[0.0, 0.0, 0.0, 3.0],
        &[0.0, 0.0, 0.0, 0.0, 1.5, -7.0],
        &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 4.0],
        &[0.0, 1.0, 3.0],
    ];
    let tol = p.ten_pow_neg(30);
    for c in corpus {
        let derivs: Vec<Real> =
            c.iter().enumerate().skip(1).map(|(k, v)| Real::from_f64(*v, p) * crate::jet::factorial(k, p)).collect();
        let v = local_extremum_test(&derivs, &tol)?;
        let brute = brute_extremum(c);
        if v.kind != brute {
            return Ok((false, format!("{c:?}: {:?} vs brute force {brute:?}", v.kind)));
        }
    }
    Ok((true, format!("{} polynomial jets", corpus.len())))
}

/// Direct check of the local pattern on `points` points of `[1-r, 1+r]`.
pub fn verify_pattern(e: &Expr, pattern: Pattern, r: &Real, points: usize, p: Precision) -> Result<Option<Real>> {
    let h = parse("H(t)")?;
    let one = Real::one(p);
    let slack = p.ten_pow_neg(p.digits() as i64 - 5);
    let r = r.with_precision(p);
    for t in linspace(&(&one - &r), &(&one + &r), points, p) {
        let v = eval(e, &t, p)?;
        let g = &v - t.scale(2) * t.ln();
        let sign = if t >= one { 1 } else { -1 };
        let mut ok = (g.signum() * sign >= 0) || g.abs() <= slack;
        if pattern == Pattern::Drr {
            let q = &v - eval(&h, &t, p)?;
            ok &= (q.signum() * sign <= 0) || q.abs() <= slack;
        }
        if !ok {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

fn sound(cert: &Certificate, e: &Expr, p: Precision) -> Result<std::result::Result<(), String>> {
    let (Some(pattern), Some(r)) = (cert.pattern, cert.radius.as_ref()) else {
        return Ok(Err("certificate without radius".into()));
    };
    match verify_pattern(e, pattern, r, 2000, p.doubled())? {
        None => Ok(Ok(())),
        Some(t) => Ok(Err(format!("pattern fails at t = {t}"))),
    }
}

fn refined_certificates(p: Precision) -> Outcome {
    let a = Real::from_f64(0.9, p);
    let mut radii = Vec::new();
    for den in [120, 60, 40] {
        let e = refined_local_expr(1, den);
        let cert = certify(&e, &a, 12, ConstantMode::Derived, p)?;
        if cert.case != Some(crate::certifier::Case::IV) {
            return Ok((false, format!("eps = 1/{den}: case {:?}", cert.case)));
        }
        if let Err(msg) = sound(&cert, &e, p)? {
            return Ok((false, format!("eps = 1/{den}: {msg}")));
        }
        radii.push(format!("1/{den}: r = {}", cert.radius.as_ref().expect("radius").to_decimal(6)));
    }
    for den in [30, 20] {
        let cert = certify(&refined_local_expr(1, den), &a, 12, ConstantMode::Derived, p)?;
        if cert.case.is_some() {
            return Ok((false, format!("eps = 1/{den} certified as {:?}", cert.case)));
        }
    }
    Ok((true, format!("{}; 1/30 and 1/20 rejected", radii.join(", "))))
}

fn case_one_quadratic(p: Precision) -> Outcome {
    let e = parse("2*(t-1) + (t-1)^2")?;
    let cert = certify(&e, &Real::from_f64(0.5, p), 12, ConstantMode::Derived, p)?;
    if (cert.case, cert.n) != (Some(crate::certifier::Case::I), Some(1)) {
        return Ok((false, format!("got case {:?}, n {:?}", cert.case, cert.n)));
    }
    if let Err(msg) = sound(&cert, &e, p)? {
        return Ok((false, msg));
    }
    Ok((true, format!("case I, n = 1, r = {}", cert.radius.as_ref().expect("radius").to_decimal(6))))
}

fn case_three_constants(p: Precision) -> Outcome {
    let derived = q_constant(5, ConstantMode::Derived, p)?;
    let literal = q_constant(5, ConstantMode::PaperLiteral, p)?;
    let fd = fd_derivative(&parse("H(t)")?, &Real::one(p), 5, p)?.value;
    let ok = (&derived + &fd).abs() <= Real::from_f64(1e-6, p)
        && (&derived - Real::from_i64(8, p)).abs() <= p.ten_pow_neg(30)
        && (&literal + Real::from_i64(12, p)).abs() <= p.ten_pow_neg(30);
    Ok((
        ok,
        format!(
            "q_5 derived {} (fd -H^(5)(1) = {}), paper-literal {}",
            derived.to_decimal(12),
            (-fd).to_decimal(12),
            literal.to_decimal(12)
        ),
    ))
}

fn witnesses(p: Precision) -> Outcome {
    let margin = Real::from_f64(WITNESS_MARGIN, p);
    let mut found = Vec::new();
    let cases: [(&str, &str, &str, RegionKind); 4] = [
        ("pade", "x*(2+x)", "2*(1+x)", RegionKind::Upper),
        ("karamata", "x*(6+x)", "2*(3+2*x)", RegionKind::Upper),
        ("cubic", "(x+2)*((x+1)^3-1)", "3*(1+x)*((x+1)^2+1)", RegionKind::Upper),
        ("identity", "x", "1", RegionKind::Lower),
    ];
    for (name, pt, qt, kind) in cases {
        let r = RationalFn::from_exprs(&parse(pt)?, &parse(qt)?, p)?;
        let w = find_witness(&r, kind, WitnessBudget::default(), p)?;
        if w.margin <= margin {
            return Ok((false, format!("{name}: margin {}", w.margin)));
        }
        found.push(format!("{name} at x = {}", w.x.to_decimal(8)));
    }
    Ok((true, found.join(", ")))
}

fn constant_fit(p: Precision) -> Outcome {
    let region = Region::upper(&Real::one(p), p)?;
    let rep = fit_sandwich(0, 0, &region, 50, FitOptions::default(), p)?;
    Ok((!rep.is_feasible(), "degree (0, 0) on [0, 1]".into()))
}

fn cb_region(p: Precision) -> Outcome {
    // CB is a lower bound left of zero.
    for x in linspace(&Real::from_f64(-0.999, p), &Real::zero(p), 200, p) {
        let cb = bound_value(BoundId::Cb, &x, p)?;
        let ln = crate::bounds::ln1p(&x, p)?;
        if cb > &ln + p.ten_pow_neg(30) {
            return Ok((false, format!("x = {x}: cb {cb} > ln {ln}")));
        }
    }
    Ok((true, "200 points of [-0.999, 0]".into()))
}

type Check = (&'static str, fn(Precision) -> Outcome);

pub const CHECKS: [Check; 18] = [
    ("expression round trip", round_trip),
    ("jet vs finite differences", jet_vs_fd),
    ("evaluation precision stability", precision_stability),
    ("bound chain", bound_chain),
    ("2t ln t against H", t_ln_t_vs_h),
    ("CB below ln(1+x) on (-1, 0]", cb_region),
    ("gap function R", gap_function),
    ("second-derivative identity", phi_second_derivative),
    ("arctan derivative closed form", atan_closed_form),
    ("H derivatives", h_derivatives),
    ("asymptotic ratio", asymptotic_ratio),
    ("local extremum test", extremum_test),
    ("refined local bound certificates", refined_certificates),
    ("case I quadratic", case_one_quadratic),
    ("case III constants", case_three_constants),
    ("sandwich witnesses", witnesses),
    ("constant sandwich infeasible", constant_fit),
    ("Q sign change gives pole witness", pole_check),
];

fn pole_check(p: Precision) -> Outcome {
    let r = RationalFn::from_exprs(&parse("x")?, &parse("x - 1")?, p)?;
    let w = find_witness(&r, RegionKind::Upper, WitnessBudget::default(), p)?;
    Ok((w.stage == "pole", format!("x / (x - 1): witness at x = {}", w.x.to_decimal(10))))
}

pub fn run_all(p: Precision) -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|(name, f)| match f(p) {
            Ok((pass, detail)) => CheckResult { name, pass, detail },
            Err(e) => CheckResult { name, pass: false, detail: format!("error: {e}") },
        })
        .collect()
}
