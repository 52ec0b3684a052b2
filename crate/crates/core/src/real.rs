//! Extended-precision real numbers.
//!
//! [`Real`] wraps an [`astro_float::BigFloat`] and carries its own working
//! precision in the mantissa length. Binary operations run at the larger of
//! the two operand precisions, so values built from one [`Precision`] stay at
//! that precision throughout a computation.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

use crate::error::{Error, Result};

const RM: RoundingMode = RoundingMode::ToEven;

/// Extra binary digits carried beyond the requested decimal precision.
const GUARD_BITS: usize = 64;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("allocate constants cache"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

/// Working precision in significant decimal digits (at least 15).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Precision {
    digits: u32,
}

impl Precision {
    pub const MIN_DIGITS: u32 = 15;
    pub const DEFAULT_DIGITS: u32 = 50;

    pub fn new(digits: u32) -> Result<Self> {
        if digits < Self::MIN_DIGITS {
            return Err(Error::Precision {
                digits,
                reason: format!("need at least {} significant digits", Self::MIN_DIGITS),
            });
        }
        if digits > 10_000 {
            return Err(Error::Precision { digits, reason: "more than 10000 digits is not supported".into() });
        }
        Ok(Self { digits })
    }

    pub fn digits(self) -> u32 {
        self.digits
    }

    /// Mantissa length in bits, including guard bits, rounded up to whole
    /// 64-bit words (the mantissa storage unit).
    pub fn bits(self) -> usize {
        let raw = (self.digits as f64 * LOG2_10).ceil() as usize + GUARD_BITS;
        raw.div_ceil(64) * 64
    }

    pub fn doubled(self) -> Self {
        Self { digits: self.digits * 2 }
    }

    pub fn plus(self, extra: u32) -> Self {
        Self { digits: self.digits + extra }
    }

    /// `10^(-k)` at this precision.
    pub fn ten_pow_neg(self, k: i64) -> Real {
        Real::from_i64(10, self).powi(-k)
    }
}

impl Default for Precision {
    fn default() -> Self {
        Self { digits: Self::DEFAULT_DIGITS }
    }
}

/// An extended-precision real number.
#[derive(Clone)]
pub struct Real(BigFloat);

impl Real {
    fn wrap(v: BigFloat) -> Self {
        Real(v)
    }

    pub fn bits(&self) -> usize {
        self.0.mantissa_max_bit_len().unwrap_or(Precision::default().bits())
    }

    fn joint_bits(&self, other: &Real) -> usize {
        self.bits().max(other.bits())
    }

    pub fn zero(p: Precision) -> Self {
        Self::from_i64(0, p)
    }

    pub fn one(p: Precision) -> Self {
        Self::from_i64(1, p)
    }

    pub fn from_i64(v: i64, p: Precision) -> Self {
        Real(BigFloat::from_i64(v, p.bits()))
    }

    /// Exact conversion of a binary double.
    pub fn from_f64(v: f64, p: Precision) -> Self {
        Real(BigFloat::from_f64(v, p.bits()))
    }

    /// `num / den` rounded at precision `p`.
    pub fn ratio(num: i64, den: i64, p: Precision) -> Self {
        Self::from_i64(num, p) / Self::from_i64(den, p)
    }

    /// Parses a decimal literal such as `0.125` or `1e-6`.
    pub fn parse_decimal(text: &str, p: Precision) -> Result<Self> {
        let trimmed = text.trim();
        let valid = !trimmed.is_empty()
            && trimmed.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-'));
        if !valid {
            return Err(Error::InvalidArgument(format!("not a decimal number: `{text}`")));
        }
        let v = with_consts(|cc| BigFloat::parse(trimmed, Radix::Dec, p.bits(), RM, cc));
        if v.is_nan() || v.is_inf() {
            return Err(Error::InvalidArgument(format!("not a decimal number: `{text}`")));
        }
        Ok(Real(v))
    }

    pub fn pi(p: Precision) -> Self {
        Real(with_consts(|cc| cc.pi(p.bits(), RM)))
    }

    /// Rounds (or extends) to precision `p`.
    pub fn with_precision(&self, p: Precision) -> Self {
        let mut v = self.0.clone();
        // Only fails on invalid precision values, which `Precision` excludes.
        let _ = v.set_precision(p.bits(), RM);
        Real(v)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.0.is_nan() && !self.0.is_inf()
    }

    pub fn is_positive(&self) -> bool {
        !self.0.is_zero() && self.0.is_positive() && !self.0.is_nan()
    }

    pub fn is_negative(&self) -> bool {
        !self.0.is_zero() && self.0.is_negative() && !self.0.is_nan()
    }

    /// -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        if self.is_positive() {
            1
        } else if self.is_negative() {
            -1
        } else {
            0
        }
    }

    pub fn abs(&self) -> Self {
        Real(self.0.abs())
    }

    pub fn max(&self, other: &Real) -> Self {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    pub fn min(&self, other: &Real) -> Self {
        if self <= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    pub fn recip(&self) -> Self {
        Real(self.0.reciprocal(self.bits(), RM))
    }

    /// Integer power; negative exponents use the reciprocal.
    pub fn powi(&self, k: i64) -> Self {
        let p = self.bits();
        let base = if k < 0 { self.0.reciprocal(p, RM) } else { self.0.clone() };
        let mut acc = BigFloat::from_u8(1, p);
        let mut sq = base;
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq, p, RM);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq, p, RM);
            }
        }
        Real(acc)
    }

    pub fn sqrt(&self) -> Self {
        Real(self.0.sqrt(self.bits(), RM))
    }

    pub fn ln(&self) -> Self {
        let p = self.bits();
        Real(with_consts(|cc| self.0.ln(p, RM, cc)))
    }

    pub fn atan(&self) -> Self {
        let p = self.bits();
        Real(with_consts(|cc| self.0.atan(p, RM, cc)))
    }

    pub fn sin(&self) -> Self {
        let p = self.bits();
        Real(with_consts(|cc| self.0.sin(p, RM, cc)))
    }

    pub fn cos(&self) -> Self {
        let p = self.bits();
        Real(with_consts(|cc| self.0.cos(p, RM, cc)))
    }

    pub fn exp(&self) -> Self {
        let p = self.bits();
        Real(with_consts(|cc| self.0.exp(p, RM, cc)))
    }

    /// Multiplies by a small integer.
    pub fn scale(&self, k: i64) -> Self {
        let p = self.bits();
        Real(self.0.mul(&BigFloat::from_i64(k, p), p, RM))
    }

    /// Multiplies by `2^k` exactly.
    pub fn mul_pow2(&self, k: i64) -> Self {
        let p = self.bits();
        let two = BigFloat::from_u8(2, p);
        let factor = if k >= 0 {
            two.powi(k as usize, p, RM)
        } else {
            two.powi(k.unsigned_abs() as usize, p, RM).reciprocal(p, RM)
        };
        Real(self.0.mul(&factor, p, RM))
    }

    /// Nearest double.
    pub fn to_f64(&self) -> f64 {
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.0.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        self.to_decimal(20).parse().unwrap_or(f64::NAN)
    }

    /// Scientific decimal string with at most `digits` significant digits,
    /// trailing zeros removed (`1.875e0`, `-4.2920367320510338e-1`).
    pub fn to_decimal(&self, digits: u32) -> String {
        if self.0.is_nan() {
            return "nan".into();
        }
        if self.0.is_inf_pos() {
            return "inf".into();
        }
        if self.0.is_inf_neg() {
            return "-inf".into();
        }
        if self.0.is_zero() {
            return "0".into();
        }
        let raw = with_consts(|cc| self.0.format(Radix::Dec, RM, cc)).unwrap_or_default();
        round_scientific(&raw, digits.max(1) as usize).unwrap_or(raw)
    }
}

/// Rounds a `[-]d.ddd[e[+-]x]` string to `digits` significant digits.
fn round_scientific(raw: &str, digits: usize) -> Option<String> {
    let (negative, body) = match raw.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, raw),
    };
    let (mantissa, exp) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i64>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let all: Vec<u8> = int_part.bytes().chain(frac_part.bytes()).map(|b| b.wrapping_sub(b'0')).collect();
    if all.iter().any(|&d| d > 9) {
        return None;
    }
    let lead = all.iter().position(|&d| d != 0)?;
    // Decimal exponent of the leading significant digit.
    let mut exp10 = exp + int_part.len() as i64 - 1 - lead as i64;
    let sig = &all[lead..];
    let mut kept: Vec<u8> = sig.iter().take(digits).copied().collect();
    if sig.len() > digits && sig[digits] >= 5 {
        let mut i = kept.len();
        loop {
            if i == 0 {
                kept.insert(0, 1);
                kept.pop();
                exp10 += 1;
                break;
            }
            i -= 1;
            if kept[i] == 9 {
                kept[i] = 0;
            } else {
                kept[i] += 1;
                break;
            }
        }
    }
    while kept.len() > 1 && kept.last() == Some(&0) {
        kept.pop();
    }
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push((b'0' + kept[0]) as char);
    if kept.len() > 1 {
        out.push('.');
        out.extend(kept[1..].iter().map(|&d| (b'0' + d) as char));
    }
    out.push('e');
    out.push_str(&exp10.to_string());
    Some(out)
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal(30))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(20) as u32;
        f.pad(&self.to_decimal(digits))
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                let p = self.joint_bits(rhs);
                Real::wrap(self.0.$method(&rhs.0, p, RM))
            }
        }
        impl $trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                (&self).$method(rhs)
            }
        }
        impl $trait<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(BigFloat::neg(&self.0))
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(BigFloat::neg(&self.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_floor_is_enforced() {
        assert!(Precision::new(14).is_err());
        assert_eq!(Precision::new(15).unwrap().digits(), 15);
        assert_eq!(Precision::default().digits(), 50);
    }

    #[test]
    fn decimal_rounding_carries() {
        assert_eq!(round_scientific("9.9996e+2", 4).unwrap(), "1e3");
        assert_eq!(round_scientific("-1.23449e-3", 4).unwrap(), "-1.234e-3");
        assert_eq!(round_scientific("0.00125", 2).unwrap(), "1.3e-3");
        assert_eq!(round_scientific("15.0", 5).unwrap(), "1.5e1");
    }

    #[test]
    fn pi_has_requested_digits() {
        let p = Precision::new(60).unwrap();
        assert_eq!(Real::pi(p).to_decimal(40), "3.141592653589793238462643383279502884197e0");
    }

    #[test]
    fn exact_rationals_print_cleanly() {
        let p = Precision::default();
        assert_eq!(Real::ratio(15, 8, p).to_decimal(50), "1.875e0");
        assert_eq!(Real::from_i64(-3, p).to_decimal(50), "-3e0");
        assert_eq!(Real::zero(p).to_decimal(50), "0");
    }

    #[test]
    fn parse_and_convert() {
        let p = Precision::default();
        let x = Real::parse_decimal("1e-6", p).unwrap();
        assert_eq!(x.to_f64(), 1e-6);
        assert!(Real::parse_decimal("pi", p).is_err());
        assert!((Real::parse_decimal("0.1", p).unwrap() - Real::ratio(1, 10, p)).is_zero());
    }

    #[test]
    fn powers_and_scaling() {
        let p = Precision::default();
        let two = Real::from_i64(2, p);
        assert_eq!(two.powi(10).to_f64(), 1024.0);
        assert_eq!(two.powi(-2).to_f64(), 0.25);
        assert_eq!(Real::one(p).mul_pow2(-3).to_f64(), 0.125);
        assert_eq!(p.ten_pow_neg(3).to_decimal(10), "1e-3");
    }
}
