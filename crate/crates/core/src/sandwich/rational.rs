//! Rational functions `P/Q` with coefficient lists.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::jet;
use crate::real::{Precision, Real};

/// `P(x) = sum a_j x^j` over `Q(x) = sum b_j x^j`; trailing zero coefficients are
/// trimmed so both leading coefficients are nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFn {
    p: Vec<Real>,
    q: Vec<Real>,
}

fn trim(mut c: Vec<Real>) -> Vec<Real> {
    while c.last().is_some_and(Real::is_zero) {
        c.pop();
    }
    c
}

impl RationalFn {
    pub fn new(p: Vec<Real>, q: Vec<Real>) -> Result<Self> {
        if p.iter().chain(&q).any(|c| !c.is_finite()) {
            return Err(Error::InvalidRational("coefficients must be finite".into()));
        }
        let p = trim(p);
        let q = trim(q);
        if p.is_empty() {
            return Err(Error::InvalidRational("numerator is identically zero".into()));
        }
        if q.is_empty() {
            return Err(Error::InvalidRational("denominator is identically zero".into()));
        }
        Ok(Self { p, q })
    }

    pub fn from_f64(p: &[f64], q: &[f64], prec: Precision) -> Result<Self> {
        let conv = |c: &[f64]| c.iter().map(|&v| Real::from_f64(v, prec)).collect();
        Self::new(conv(p), conv(q))
    }

    /// Reads coefficients off two polynomial expressions in `x`.
    pub fn from_exprs(p: &Expr, q: &Expr, prec: Precision) -> Result<Self> {
        Self::new(poly_coeffs(p, prec)?, poly_coeffs(q, prec)?)
    }

    pub fn p_coeffs(&self) -> &[Real] {
        &self.p
    }

    pub fn q_coeffs(&self) -> &[Real] {
        &self.q
    }

    pub fn deg_p(&self) -> usize {
        self.p.len() - 1
    }

    pub fn deg_q(&self) -> usize {
        self.q.len() - 1
    }

    pub fn eval_p(&self, x: &Real, prec: Precision) -> Real {
        horner(&self.p, x, prec)
    }

    pub fn eval_q(&self, x: &Real, prec: Precision) -> Real {
        horner(&self.q, x, prec)
    }

    pub fn eval(&self, x: &Real, prec: Precision) -> Result<Real> {
        let q = self.eval_q(x, prec);
        if q.is_zero() {
            return Err(Error::DenominatorVanishes { at: x.to_decimal(20) });
        }
        Ok(self.eval_p(x, prec) / q)
    }

    /// Taylor coefficients of `P/Q` at 0 through `order`.
    pub fn taylor_at_zero(&self, order: usize, prec: Precision) -> Result<Vec<Real>> {
        let b0 = self.q[0].with_precision(prec);
        if b0.is_zero() {
            return Err(Error::DenominatorVanishes { at: "0".into() });
        }
        let coeff = |c: &[Real], k: usize| c.get(k).map_or(Real::zero(prec), |v| v.with_precision(prec));
        let mut r: Vec<Real> = Vec::with_capacity(order + 1);
        for k in 0..=order {
            let mut acc = coeff(&self.p, k);
            for i in 1..=k.min(self.deg_q()) {
                acc = acc - coeff(&self.q, i) * &r[k - i];
            }
            r.push(acc / &b0);
        }
        Ok(r)
    }

    /// `(P) / (Q)` with decimal coefficients.
    pub fn describe(&self, digits: u32) -> String {
        format!("({}) / ({})", poly_text(&self.p, digits), poly_text(&self.q, digits))
    }
}

fn horner(c: &[Real], x: &Real, prec: Precision) -> Real {
    let x = x.with_precision(prec);
    c.iter().rev().fold(Real::zero(prec), |acc, a| acc * &x + a.with_precision(prec))
}

fn poly_text(c: &[Real], digits: u32) -> String {
    let mut terms = Vec::new();
    for (j, a) in c.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let v = a.to_decimal(digits);
        terms.push(match j {
            0 => v,
            1 => format!("{v}*x"),
            _ => format!("{v}*x^{j}"),
        });
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

fn poly_coeffs(e: &Expr, prec: Precision) -> Result<Vec<Real>> {
    let Some(deg) = e.polynomial_degree() else {
        return Err(Error::InvalidRational(format!("`{e}` is not a polynomial")));
    };
    let j = jet(e, &Real::zero(prec), deg, prec)?;
    Ok(j.coeffs().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn p() -> Precision {
        Precision::default()
    }

    #[test]
    fn from_exprs_reads_coefficients() {
        let r = RationalFn::from_exprs(&parse("x*(2+x)").unwrap(), &parse("2*(1+x)").unwrap(), p()).unwrap();
        let pc: Vec<f64> = r.p_coeffs().iter().map(Real::to_f64).collect();
        let qc: Vec<f64> = r.q_coeffs().iter().map(Real::to_f64).collect();
        assert_eq!(pc, vec![0.0, 2.0, 1.0]);
        assert_eq!(qc, vec![2.0, 2.0]);
        assert_eq!(r.eval(&Real::from_i64(3, p()), p()).unwrap().to_decimal(10), "1.875e0");
    }

    #[test]
    fn rejects_zero_numerator_and_non_polynomials() {
        assert!(matches!(RationalFn::from_f64(&[0.0, 0.0], &[1.0], p()), Err(Error::InvalidRational(_))));
        assert!(matches!(RationalFn::from_f64(&[1.0], &[0.0], p()), Err(Error::InvalidRational(_))));
        let e = parse("ln(x+1)").unwrap();
        assert!(RationalFn::from_exprs(&e, &parse("1").unwrap(), p()).is_err());
        let r = RationalFn::from_f64(&[1.0, 2.0, 0.0], &[1.0, 0.0], p()).unwrap();
        assert_eq!((r.deg_p(), r.deg_q()), (1, 0));
    }

    #[test]
    fn taylor_series_of_quotient() {
        // x / (1 + x) = x - x^2 + x^3 - ...
        let r = RationalFn::from_f64(&[0.0, 1.0], &[1.0, 1.0], p()).unwrap();
        let t: Vec<f64> = r.taylor_at_zero(4, p()).unwrap().iter().map(Real::to_f64).collect();
        assert_eq!(t, vec![0.0, 1.0, -1.0, 1.0, -1.0]);
        let bad = RationalFn::from_f64(&[1.0], &[0.0, 1.0], p()).unwrap();
        assert!(bad.taylor_at_zero(2, p()).is_err());
    }
}
