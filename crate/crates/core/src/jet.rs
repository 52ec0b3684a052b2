//! Truncated Taylor series ("jets") of expressions at a point.
//!
//! Coefficients are propagated through the expression tree with the usual
//! power-series recurrences. `atan` is expanded through its differential
//! equation `u' = a' / (1 + a^2)`, so no closed-form arctan derivative is
//! involved.

use crate::error::{Error, Result};
use crate::eval::constant;
use crate::expr::Expr;
use crate::real::{Precision, Real};

/// Taylor coefficients `c_0..c_N` of a function at `center`.
#[derive(Debug, Clone)]
pub struct Jet {
    center: Real,
    coeffs: Vec<Real>,
    precision: Precision,
}

impl Jet {
    pub fn center(&self) -> &Real {
        &self.center
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn coeffs(&self) -> &[Real] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Option<&Real> {
        self.coeffs.get(k)
    }

    /// `k! * c_k`, the k-th derivative at the center.
    pub fn derivative(&self, k: usize) -> Option<Real> {
        let c = self.coeffs.get(k)?;
        Some(c * factorial(k, self.precision))
    }

    /// All derivatives `f(c), f'(c), ..., f^(N)(c)`.
    pub fn derivatives(&self) -> Vec<Real> {
        (0..self.coeffs.len()).map(|k| self.derivative(k).expect("k within order")).collect()
    }
}

pub fn factorial(k: usize, p: Precision) -> Real {
    (2..=k as i64).fold(Real::one(p), |acc, i| acc.scale(i))
}

/// Taylor expansion of `e` at `center` up to `order`.
pub fn jet(e: &Expr, center: &Real, order: usize, p: Precision) -> Result<Jet> {
    let center = center.with_precision(p);
    let ctx = Ctx { center: &center, n: order + 1, p };
    let coeffs = ctx.series(e)?.0;
    Ok(Jet { center, coeffs, precision: p })
}

struct Ctx<'a> {
    center: &'a Real,
    /// Number of coefficients.
    n: usize,
    p: Precision,
}

struct Series(Vec<Real>);

impl Ctx<'_> {
    fn zeros(&self) -> Vec<Real> {
        vec![Real::zero(self.p); self.n]
    }

    fn constant(&self, v: Real) -> Series {
        let mut c = self.zeros();
        c[0] = v;
        Series(c)
    }

    fn series(&self, e: &Expr) -> Result<Series> {
        Ok(match e {
            Expr::Const(c) => self.constant(constant(c, self.p)?),
            Expr::Var(_) => {
                let mut c = self.zeros();
                c[0] = self.center.clone();
                if self.n > 1 {
                    c[1] = Real::one(self.p);
                }
                Series(c)
            }
            Expr::Neg(a) => Series(self.series(a)?.0.into_iter().map(|v| -v).collect()),
            Expr::Add(a, b) => zip(self.series(a)?, self.series(b)?, |x, y| x + y),
            Expr::Sub(a, b) => zip(self.series(a)?, self.series(b)?, |x, y| x - y),
            Expr::Mul(a, b) => mul(&self.series(a)?, &self.series(b)?),
            Expr::Div(a, b) => {
                let den = self.series(b)?;
                if den.0[0].is_zero() {
                    return Err(Error::Domain {
                        op: "division",
                        detail: format!("denominator `{b}` is zero at {}", self.center),
                    });
                }
                div(&self.series(a)?, &den)
            }
            Expr::PowInt(a, k) => {
                let base = self.series(a)?;
                if *k < 0 && base.0[0].is_zero() {
                    return Err(Error::Domain {
                        op: "power",
                        detail: format!("`{a}` is zero at {} with exponent {k}", self.center),
                    });
                }
                self.powi(&base, *k)
            }
            Expr::Ln(a) => {
                let s = self.series(a)?;
                if !s.0[0].is_positive() {
                    return Err(Error::Domain {
                        op: "ln",
                        detail: format!("argument `{a}` = {} at {}", s.0[0], self.center),
                    });
                }
                ln(&s)
            }
            Expr::Sqrt(a) => {
                let s = self.series(a)?;
                if s.0[0].is_negative() {
                    return Err(Error::Domain {
                        op: "sqrt",
                        detail: format!("argument `{a}` = {} at {}", s.0[0], self.center),
                    });
                }
                if s.0[0].is_zero() && self.n > 1 {
                    return Err(Error::NonDifferentiable(format!("sqrt of `{a}` vanishes at {}", self.center)));
                }
                sqrt(&s)
            }
            Expr::Atan(a) => self.atan(&self.series(a)?),
            Expr::Sin(a) => sin_cos(&self.series(a)?, self.p).0,
        })
    }

    fn powi(&self, base: &Series, k: i32) -> Series {
        let mut acc = self.constant(Real::one(self.p));
        let mut sq = Series(base.0.clone());
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(&acc, &sq);
            }
            e >>= 1;
            if e > 0 {
                sq = mul(&sq, &sq);
            }
        }
        if k < 0 {
            div(&self.constant(Real::one(self.p)), &acc)
        } else {
            acc
        }
    }

    fn atan(&self, a: &Series) -> Series {
        let mut out = self.zeros();
        out[0] = a.0[0].atan();
        if self.n == 1 {
            return Series(out);
        }
        // u' = a' / (1 + a^2), truncated to n - 1 coefficients.
        let m = self.n - 1;
        let deriv = Series((0..m).map(|j| a.0[j + 1].scale(j as i64 + 1)).collect());
        let mut den = mul(&Series(a.0[..m].to_vec()), &Series(a.0[..m].to_vec()));
        den.0[0] = &den.0[0] + Real::one(self.p);
        let w = div(&deriv, &den);
        for (k, slot) in out.iter_mut().enumerate().take(self.n).skip(1) {
            *slot = &w.0[k - 1] / Real::from_i64(k as i64, self.p);
        }
        Series(out)
    }
}

fn zip(a: Series, b: Series, f: impl Fn(Real, Real) -> Real) -> Series {
    Series(a.0.into_iter().zip(b.0).map(|(x, y)| f(x, y)).collect())
}

fn mul(a: &Series, b: &Series) -> Series {
    let n = a.0.len();
    Series((0..n).map(|k| (1..=k).fold(&a.0[0] * &b.0[k], |acc, j| acc + &a.0[j] * &b.0[k - j])).collect())
}

/// Requires `b_0 != 0`.
fn div(a: &Series, b: &Series) -> Series {
    let n = a.0.len();
    let mut c: Vec<Real> = Vec::with_capacity(n);
    for k in 0..n {
        let acc = (1..=k).fold(a.0[k].clone(), |acc, j| acc - &b.0[j] * &c[k - j]);
        c.push(acc / &b.0[0]);
    }
    Series(c)
}

/// Requires `a_0 > 0`.
fn ln(a: &Series) -> Series {
    let n = a.0.len();
    let mut u: Vec<Real> = Vec::with_capacity(n);
    u.push(a.0[0].ln());
    for k in 1..n {
        // k u_k a_0 = k a_k - sum_{j=1}^{k-1} j u_j a_{k-j}
        let s = (1..k).fold(a.0[k].scale(k as i64), |acc, j| acc - (&u[j] * &a.0[k - j]).scale(j as i64));
        u.push(s / a.0[0].scale(k as i64));
    }
    Series(u)
}

/// Requires `a_0 > 0` unless only the value is requested.
fn sqrt(a: &Series) -> Series {
    let n = a.0.len();
    let mut s: Vec<Real> = Vec::with_capacity(n);
    s.push(a.0[0].sqrt());
    for k in 1..n {
        let acc = (1..k).fold(a.0[k].clone(), |acc, j| acc - &s[j] * &s[k - j]);
        s.push(acc / s[0].scale(2));
    }
    Series(s)
}

fn sin_cos(a: &Series, p: Precision) -> (Series, Series) {
    let n = a.0.len();
    let mut s: Vec<Real> = Vec::with_capacity(n);
    let mut c: Vec<Real> = Vec::with_capacity(n);
    s.push(a.0[0].sin());
    c.push(a.0[0].cos());
    for k in 1..n {
        // k s_k = sum_{j=1}^k j a_j c_{k-j},  k c_k = -sum_{j=1}^k j a_j s_{k-j}
        let zero = Real::zero(p);
        let (ds, dc) = (1..=k).fold((zero.clone(), zero), |(ds, dc), j| {
            let ja = a.0[j].scale(j as i64);
            (ds + &ja * &c[k - j], dc - &ja * &s[k - j])
        });
        let kk = Real::from_i64(k as i64, p);
        s.push(ds / &kk);
        c.push(dc / &kk);
    }
    (Series(s), Series(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn derivs(text: &str, center: f64, order: usize) -> Vec<f64> {
        let p = Precision::default();
        let j = jet(&parse(text).unwrap(), &Real::from_f64(center, p), order, p).unwrap();
        assert_eq!(j.coeffs().len(), order + 1);
        j.derivatives().iter().map(Real::to_f64).collect()
    }

    #[test]
    fn t_ln_t_hand_derivatives() {
        // d^3 = -2/t^2, d^4 = 4/t^3, d^5 = -12/t^4
        assert_eq!(derivs("2*t*ln(t)", 1.0, 5), vec![0.0, 2.0, 2.0, -2.0, 4.0, -12.0]);
    }

    #[test]
    fn h_derivatives_at_one() {
        let d = derivs("H(t)", 1.0, 5);
        let expected = [0.0, 2.0, 2.0, -2.0, 4.0, -8.0];
        for (got, want) in d.iter().zip(expected) {
            assert!((got - want).abs() < 1e-15, "{d:?}");
        }
    }

    #[test]
    fn constant_pi() {
        let d = derivs("pi", 1.0, 3);
        assert_eq!(d, vec![std::f64::consts::PI, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn elementary_series_at_zero() {
        // atan: x - x^3/3 + x^5/5; sin: x - x^3/6; 1/(1-x) geometric.
        let p = Precision::default();
        let x0 = Real::zero(p);
        let atan = jet(&parse("atan(x)").unwrap(), &x0, 5, p).unwrap();
        let c: Vec<f64> = atan.coeffs().iter().map(Real::to_f64).collect();
        assert_eq!(c, vec![0.0, 1.0, 0.0, -1.0 / 3.0, 0.0, 0.2]);
        let sin = jet(&parse("sin(x)").unwrap(), &x0, 3, p).unwrap();
        assert_eq!(sin.coeff(3).unwrap().to_f64(), -1.0 / 6.0);
        let geo = jet(&parse("1/(1-x)").unwrap(), &x0, 6, p).unwrap();
        assert!(geo.coeffs().iter().all(|c| c.to_f64() == 1.0));
        let sq = jet(&parse("sqrt(1+x)").unwrap(), &x0, 2, p).unwrap();
        assert_eq!(sq.coeff(2).unwrap().to_f64(), -0.125);
        let pw = jet(&parse("(1+x)^(-2)").unwrap(), &x0, 3, p).unwrap();
        assert_eq!(pw.coeff(3).unwrap().to_f64(), -4.0);
    }

    #[test]
    fn singular_points() {
        let p = Precision::default();
        let zero = Real::zero(p);
        assert!(matches!(jet(&parse("sqrt(x)").unwrap(), &zero, 1, p), Err(Error::NonDifferentiable(_))));
        assert!(jet(&parse("sqrt(x)").unwrap(), &zero, 0, p).is_ok());
        assert!(matches!(jet(&parse("ln(x)").unwrap(), &zero, 2, p), Err(Error::Domain { .. })));
        assert!(matches!(jet(&parse("1/x").unwrap(), &zero, 2, p), Err(Error::Domain { .. })));
    }
}
