//! Pointwise evaluation of expressions in extended precision.

use crate::error::{Error, Result};
use crate::expr::{Constant, Expr};
use crate::real::{Precision, Real};

/// Value of a constant node at precision `p`.
pub fn constant(c: &Constant, p: Precision) -> Result<Real> {
    match c {
        Constant::Pi => Ok(Real::pi(p)),
        Constant::Number(s) => Real::parse_decimal(s, p),
    }
}

/// Evaluates `e` at `x`, reporting domain violations instead of producing NaN.
pub fn eval(e: &Expr, x: &Real, p: Precision) -> Result<Real> {
    let x = x.with_precision(p);
    eval_at(e, &x, p)
}

fn eval_at(e: &Expr, x: &Real, p: Precision) -> Result<Real> {
    let v = |a: &Expr| eval_at(a, x, p);
    Ok(match e {
        Expr::Const(c) => constant(c, p)?,
        Expr::Var(_) => x.clone(),
        Expr::Neg(a) => -v(a)?,
        Expr::Add(a, b) => v(a)? + v(b)?,
        Expr::Sub(a, b) => v(a)? - v(b)?,
        Expr::Mul(a, b) => v(a)? * v(b)?,
        Expr::Div(a, b) => {
            let den = v(b)?;
            if den.is_zero() {
                return Err(domain("division", format!("denominator `{b}` is zero at {x}")));
            }
            v(a)? / den
        }
        Expr::PowInt(a, k) => {
            let base = v(a)?;
            if *k < 0 && base.is_zero() {
                return Err(domain("power", format!("`{a}` is zero at {x} with exponent {k}")));
            }
            base.powi(*k as i64)
        }
        Expr::Ln(a) => {
            let arg = v(a)?;
            if !arg.is_positive() {
                return Err(domain("ln", format!("argument `{a}` = {arg} at {x} is not positive")));
            }
            arg.ln()
        }
        Expr::Sqrt(a) => {
            let arg = v(a)?;
            if arg.is_negative() {
                return Err(domain("sqrt", format!("argument `{a}` = {arg} at {x} is negative")));
            }
            arg.sqrt()
        }
        Expr::Atan(a) => v(a)?.atan(),
        Expr::Sin(a) => v(a)?.sin(),
    })
}

fn domain(op: &'static str, detail: String) -> Error {
    Error::Domain { op, detail }
}
