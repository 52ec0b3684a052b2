//! Univariate expression trees and their text syntax.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | base ('^' exponent)?
//! exponent := integer | '-' integer | '(' '-'? integer ')'
//! base   := number | 'pi' | variable | func '(' expr ')' | '(' expr ')'
//! func   := ln | sqrt | atan | sin | f | H
//! ```
//!
//! The variable is `t` or `x`; an expression may use only one of them.
//! `f(u)` and `H(u)` are aliases that expand while parsing into
//! `pi + 1/2*(4 + pi)*u - 2*(u + 2)*atan(sqrt(u + 1))` and `f(u^2 - 1)`.

use std::fmt;
use std::sync::LazyLock;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    T,
    X,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::X => "x",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constant {
    /// Decimal literal kept as written; rounded only when evaluated.
    Number(String),
    Pi,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(Constant),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    PowInt(Box<Expr>, i32),
    Ln(Box<Expr>),
    Sqrt(Box<Expr>),
    Atan(Box<Expr>),
    Sin(Box<Expr>),
}

static F_TEMPLATE: LazyLock<Expr> =
    LazyLock::new(|| parse("pi + (1/2)*(4+pi)*x - 2*(x+2)*atan(sqrt(x+1))").expect("f template parses"));

impl Expr {
    pub fn num(text: impl Into<String>) -> Expr {
        Expr::Const(Constant::Number(text.into()))
    }

    pub fn int(v: i64) -> Expr {
        if v < 0 {
            -Expr::num(v.unsigned_abs().to_string())
        } else {
            Expr::num(v.to_string())
        }
    }

    pub fn pi() -> Expr {
        Expr::Const(Constant::Pi)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn powi(self, k: i32) -> Expr {
        Expr::PowInt(Box::new(self), k)
    }

    pub fn ln(self) -> Expr {
        Expr::Ln(Box::new(self))
    }

    pub fn sqrt(self) -> Expr {
        Expr::Sqrt(Box::new(self))
    }

    pub fn atan(self) -> Expr {
        Expr::Atan(Box::new(self))
    }

    pub fn sin(self) -> Expr {
        Expr::Sin(Box::new(self))
    }

    /// `f(arg)` with `f(x) = pi + (4+pi)x/2 - 2(x+2) atan(sqrt(x+1))`.
    pub fn f_of(arg: Expr) -> Expr {
        F_TEMPLATE.substitute(&arg)
    }

    /// `H(arg) = f(arg^2 - 1)`.
    pub fn h_of(arg: Expr) -> Expr {
        Expr::f_of(arg.powi(2) - Expr::int(1))
    }

    /// Replaces every occurrence of the variable with `with`.
    pub fn substitute(&self, with: &Expr) -> Expr {
        let sub = |e: &Expr| Box::new(e.substitute(with));
        match self {
            Expr::Const(c) => Expr::Const(c.clone()),
            Expr::Var(_) => with.clone(),
            Expr::Neg(a) => Expr::Neg(sub(a)),
            Expr::Add(a, b) => Expr::Add(sub(a), sub(b)),
            Expr::Sub(a, b) => Expr::Sub(sub(a), sub(b)),
            Expr::Mul(a, b) => Expr::Mul(sub(a), sub(b)),
            Expr::Div(a, b) => Expr::Div(sub(a), sub(b)),
            Expr::PowInt(a, k) => Expr::PowInt(sub(a), *k),
            Expr::Ln(a) => Expr::Ln(sub(a)),
            Expr::Sqrt(a) => Expr::Sqrt(sub(a)),
            Expr::Atan(a) => Expr::Atan(sub(a)),
            Expr::Sin(a) => Expr::Sin(sub(a)),
        }
    }

    /// The variable symbol used, if any.
    pub fn variable(&self) -> Option<Var> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(v) => Some(*v),
            Expr::Neg(a) | Expr::PowInt(a, _) | Expr::Ln(a) | Expr::Sqrt(a) | Expr::Atan(a) | Expr::Sin(a) => {
                a.variable()
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.variable().or_else(|| b.variable())
            }
        }
    }

    /// Degree bound when the expression is a polynomial, `None` otherwise.
    pub fn polynomial_degree(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => Some(0),
            Expr::Var(_) => Some(1),
            Expr::Neg(a) => a.polynomial_degree(),
            Expr::Add(a, b) | Expr::Sub(a, b) => Some(a.polynomial_degree()?.max(b.polynomial_degree()?)),
            Expr::Mul(a, b) => Some(a.polynomial_degree()? + b.polynomial_degree()?),
            Expr::Div(a, b) => {
                // Division only by constants.
                if b.variable().is_none() {
                    a.polynomial_degree()
                } else {
                    None
                }
            }
            Expr::PowInt(a, k) if *k >= 0 => Some(a.polynomial_degree()? * (*k as usize)),
            Expr::PowInt(a, _) => {
                if a.variable().is_none() {
                    Some(0)
                } else {
                    None
                }
            }
            Expr::Ln(a) | Expr::Sqrt(a) | Expr::Atan(a) | Expr::Sin(a) => {
                if a.variable().is_none() {
                    Some(0)
                } else {
                    None
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::PowInt(a, _) | Expr::Ln(a) | Expr::Sqrt(a) | Expr::Atan(a) | Expr::Sin(a) => {
                1 + a.depth()
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::PowInt(..) => 4,
            _ => 5,
        }
    }
}

macro_rules! expr_binop {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl std::ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }
    };
}

expr_binop!(Add, add, Add);
expr_binop!(Sub, sub, Sub);
expr_binop!(Mul, mul, Mul);
expr_binop!(Div, div, Div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

struct Child<'a>(&'a Expr, bool);

impl fmt::Display for Child<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prec = self.precedence();
        // Left operands need parentheses below the operator's level, right
        // operands at or below it (all binary operators are left-associative).
        let left = |e: &Expr| e.precedence() < prec;
        let right = |e: &Expr| e.precedence() <= prec;
        match self {
            Expr::Const(Constant::Number(s)) => f.write_str(s),
            Expr::Const(Constant::Pi) => f.write_str("pi"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(a) => write!(f, "-{}", Child(a, a.precedence() < 3)),
            Expr::Add(a, b) => write!(f, "{} + {}", Child(a, left(a)), Child(b, right(b))),
            Expr::Sub(a, b) => write!(f, "{} - {}", Child(a, left(a)), Child(b, right(b))),
            Expr::Mul(a, b) => write!(f, "{}*{}", Child(a, left(a)), Child(b, right(b))),
            Expr::Div(a, b) => write!(f, "{}/{}", Child(a, left(a)), Child(b, right(b))),
            Expr::PowInt(a, k) => {
                let base = Child(a, a.precedence() < 5);
                if *k < 0 {
                    write!(f, "{base}^({k})")
                } else {
                    write!(f, "{base}^{k}")
                }
            }
            Expr::Ln(a) => write!(f, "ln({a})"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
            Expr::Atan(a) => write!(f, "atan({a})"),
            Expr::Sin(a) => write!(f, "sin({a})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Tok::Plus, start)),
            b'-' => out.push((Tok::Minus, start)),
            b'*' => out.push((Tok::Star, start)),
            b'/' => out.push((Tok::Slash, start)),
            b'^' => out.push((Tok::Caret, start)),
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // Exponent only when digits follow, so `2e` stays an error.
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit = &text[start..i];
                if lit.matches('.').count() > 1 || !lit.bytes().any(|b| b.is_ascii_digit()) {
                    return Err(Error::Syntax { pos: start, message: format!("malformed number `{lit}`") });
                }
                out.push((Tok::Num(lit.to_string()), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(Error::Syntax { pos: start, message: format!("unexpected character `{ch}`") });
            }
        }
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    var: Option<(Var, usize)>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.pos(), message: message.into() })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = lhs + self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    lhs = lhs - self.term()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = lhs * self.factor()?;
                }
                Tok::Slash => {
                    self.bump();
                    lhs = lhs / self.factor()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(-self.factor()?);
        }
        let base = self.base()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let k = self.exponent()?;
            return Ok(base.powi(k));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32> {
        let paren = *self.peek() == Tok::LParen;
        if paren {
            self.bump();
        }
        let negative = *self.peek() == Tok::Minus;
        if negative {
            self.bump();
        }
        let pos = self.pos();
        let k = match self.bump() {
            Tok::Num(s) if s.bytes().all(|b| b.is_ascii_digit()) => {
                s.parse::<i32>().map_err(|_| Error::Syntax { pos, message: format!("exponent `{s}` too large") })?
            }
            _ => return Err(Error::Syntax { pos, message: "expected integer exponent".into() }),
        };
        if paren {
            self.expect(Tok::RParen, "`)` after exponent")?;
        }
        Ok(if negative { -k } else { k })
    }

    fn base(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(s) => Ok(Expr::num(s)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => self.ident(name, pos),
            Tok::End => Err(Error::Syntax { pos, message: "unexpected end of input".into() }),
            t => Err(Error::Syntax { pos, message: format!("unexpected token {t:?}") }),
        }
    }

    fn ident(&mut self, name: String, pos: usize) -> Result<Expr> {
        let var = match name.as_str() {
            "pi" => return Ok(Expr::pi()),
            "t" => Some(Var::T),
            "x" => Some(Var::X),
            _ => None,
        };
        if let Some(v) = var {
            match self.var {
                Some((seen, _)) if seen != v => {
                    return Err(Error::Syntax {
                        pos,
                        message: format!("expression mixes variables `{}` and `{}`", seen.name(), v.name()),
                    })
                }
                _ => self.var = Some((v, pos)),
            }
            return Ok(Expr::Var(v));
        }
        let func: fn(Expr) -> Expr = match name.as_str() {
            "ln" => Expr::ln,
            "sqrt" => Expr::sqrt,
            "atan" => Expr::atan,
            "sin" => Expr::sin,
            "f" => Expr::f_of,
            "H" => Expr::h_of,
            _ => return Err(Error::UnknownIdentifier { name, pos }),
        };
        self.expect(Tok::LParen, &format!("`(` after `{name}`"))?;
        let arg = self.expr()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(func(arg))
    }
}

/// Parses an expression, expanding the `f` and `H` aliases.
pub fn parse(text: &str) -> Result<Expr> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, var: None };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail("unexpected trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t() -> Expr {
        Expr::var(Var::T)
    }

    #[test]
    fn grammar_maps_directly() {
        let e = parse("2*t*ln(t)").unwrap();
        assert_eq!(e, Expr::num("2") * t() * t().ln());
    }

    #[test]
    fn f_alias_matches_written_definition() {
        let written = parse("pi + (1/2)*(4+pi)*x - 2*(x+2)*atan(sqrt(x+1))").unwrap();
        assert_eq!(parse("f(x)").unwrap(), written);
        assert_eq!(written.variable(), Some(Var::X));
    }

    #[test]
    fn h_alias_expands_through_f() {
        let e = parse("H(t) - (1/60)*(t-1)^5").unwrap();
        let h = Expr::f_of(t().powi(2) - Expr::int(1));
        let eps = Expr::num("1") / Expr::num("60");
        assert_eq!(e, h - eps * (t() - Expr::num("1")).powi(5));
        assert_eq!(e.variable(), Some(Var::T));
    }

    #[test]
    fn printing_round_trips() {
        for text in [
            "2*t*ln(t)",
            "-t^2 + -(t - 1)^(-3)",
            "1/(2/t)/(t*t)",
            "t - (t - t) - -t",
            "(-t)^2*sin(atan(sqrt(t + 1e-3)))",
            "H(t) - (1/60)*(t-1)^5",
            "pi",
        ] {
            let e = parse(text).unwrap();
            let printed = e.to_string();
            assert_eq!(parse(&printed).unwrap(), e, "{text} -> {printed}");
        }
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(parse("2*t + foo(t)"), Err(Error::UnknownIdentifier { name: "foo".into(), pos: 6 }));
        match parse("t + (x") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("t +"), Err(Error::Syntax { pos: 3, .. })));
        assert!(matches!(parse("t^1.5"), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse("2$"), Err(Error::Syntax { pos: 1, .. })));
        assert!(matches!(parse("ln t"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn polynomial_degree_detection() {
        assert_eq!(parse("x*(2+x)").unwrap().polynomial_degree(), Some(2));
        assert_eq!(parse("(x+1)^3/3 - sqrt(2)").unwrap().polynomial_degree(), Some(3));
        assert_eq!(parse("1/x").unwrap().polynomial_degree(), None);
        assert_eq!(parse("ln(x)").unwrap().polynomial_degree(), None);
    }
}
