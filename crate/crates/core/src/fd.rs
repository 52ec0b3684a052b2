//! Central finite differences with Richardson extrapolation.
//!
//! Independent of the jet machinery: only pointwise evaluation is used.

use crate::error::{Error, Result};
use crate::eval::eval;
use crate::expr::Expr;
use crate::real::{Precision, Real};

/// Number of step halvings; the tableau eliminates the h^2, h^4 and h^6 terms.
const LEVELS: usize = 3;

#[derive(Debug, Clone)]
pub struct FdEstimate {
    pub value: Real,
    /// Difference between the two most refined tableau entries.
    pub error: Real,
}

impl FdEstimate {
    /// Fails with [`Error::NoConvergence`] when the error estimate exceeds `tol`.
    pub fn within(self, tol: &Real) -> Result<FdEstimate> {
        if self.error > *tol {
            return Err(Error::NoConvergence { estimate: self.error.to_decimal(6), tolerance: tol.to_decimal(6) });
        }
        Ok(self)
    }
}

/// Base step `10^(-digits/(k+2))`.
pub fn base_step(k: usize, p: Precision) -> f64 {
    10f64.powf(-(p.digits() as f64) / (k as f64 + 2.0))
}

/// Estimate of the k-th derivative of `e` at `center`.
pub fn fd_derivative(e: &Expr, center: &Real, k: usize, p: Precision) -> Result<FdEstimate> {
    if k == 0 {
        return Err(Error::InvalidArgument("finite-difference order must be at least 1".into()));
    }
    let center = center.with_precision(p);
    let h0 = Real::from_f64(base_step(k, p), p);

    // Row i of the tableau uses step h0 / 2^i.
    let mut rows: Vec<Vec<Real>> = Vec::with_capacity(LEVELS + 1);
    for i in 0..=LEVELS {
        let h = h0.mul_pow2(-(i as i64));
        let mut row = vec![central_difference(e, &center, k, &h, p)?];
        for l in 1..=i {
            let four_l = Real::from_i64(4i64.pow(l as u32), p);
            let prev = &rows[i - 1][l - 1];
            let cur = &row[l - 1];
            let next = cur + (cur - prev) / (&four_l - Real::one(p));
            row.push(next);
        }
        rows.push(row);
    }
    let last = &rows[LEVELS];
    let value = last[LEVELS].clone();
    let error = (&last[LEVELS] - &last[LEVELS - 1]).abs();
    Ok(FdEstimate { value, error })
}

/// `h^-k * sum_i (-1)^i C(k,i) f(x + (k/2 - i) h)`, accurate to O(h^2).
fn central_difference(e: &Expr, x: &Real, k: usize, h: &Real, p: Precision) -> Result<Real> {
    let half = h.mul_pow2(-1);
    let mut acc = Real::zero(p);
    let mut binom: i64 = 1;
    for i in 0..=k {
        // offset (k - 2i) * h / 2
        let offset = half.scale(k as i64 - 2 * i as i64);
        let fx = eval(e, &(x + offset), p)?;
        let term = fx.scale(binom);
        acc = if i % 2 == 0 { acc + term } else { acc - term };
        binom = binom * (k - i) as i64 / (i as i64 + 1);
    }
    Ok(acc / h.powi(k as i64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn fd(text: &str, at: f64, k: usize) -> FdEstimate {
        let p = Precision::default();
        fd_derivative(&parse(text).unwrap(), &Real::from_f64(at, p), k, p).unwrap()
    }

    #[test]
    fn ln_first_derivative() {
        let d = fd("ln(t)", 1.0, 1);
        assert!((d.value.to_f64() - 1.0).abs() < 1e-10);
        assert!(d.error.to_f64() < 1e-10);
    }

    #[test]
    fn h_fifth_derivative() {
        let d = fd("H(t)", 1.0, 5);
        assert!((d.value.to_f64() + 8.0).abs() < 1e-6, "{:?}", d.value);
    }

    #[test]
    fn atan_third_derivative_at_zero() {
        // (6x^2 - 2)/(1 + x^2)^3 at 0
        let d = fd("atan(x)", 0.0, 3);
        assert!((d.value.to_f64() + 2.0).abs() < 1e-8);
    }

    #[test]
    fn tolerance_and_order_errors() {
        let p = Precision::default();
        let tight = p.ten_pow_neg(200);
        assert!(matches!(fd("sin(x)*ln(x+3)", 0.3, 4).within(&tight), Err(Error::NoConvergence { .. })));
        let e = parse("x").unwrap();
        assert!(fd_derivative(&e, &Real::zero(p), 0, p).is_err());
        let ln = parse("ln(x)").unwrap();
        assert!(matches!(fd_derivative(&ln, &Real::zero(p), 1, p), Err(Error::Domain { .. })));
    }
}
