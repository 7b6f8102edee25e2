//! Text grammar for δ-polynomials.
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := atom ['^' ['-'] integer]
//! atom   := integer | variable | 'p' | '(' expr ')'
//! ```
//!
//! A variable is a base name followed by primes (`x`, `x'`, `x''`) or by an
//! explicit order in parentheses (`x(3)`). Division and negative exponents
//! are only allowed for nonzero constants; `p` denotes the prime.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::deltapoly::JetVarSet;
use crate::error::{Error, Result};
use crate::poly::{JetVar, Monomial, Poly, QPoly, Rationals};

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn jet_var_name(base: &str, order: u32) -> String {
    if order <= 3 {
        format!("{base}{}", "'".repeat(order as usize))
    } else {
        format!("{base}({order})")
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String, u32),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(s: &str) -> Result<Vec<(usize, Tok)>> {
    let b = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => out.push((start, Tok::Plus)),
            '-' => out.push((start, Tok::Minus)),
            '*' => out.push((start, Tok::Star)),
            '/' => out.push((start, Tok::Slash)),
            '^' => out.push((start, Tok::Caret)),
            '(' => out.push((start, Tok::LParen)),
            ')' => out.push((start, Tok::RParen)),
            '0'..='9' => {
                while i < b.len() && b[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((start, Tok::Int(s[start..i].parse().unwrap())));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                    i += 1;
                }
                let name = s[start..i].to_string();
                let mut order = 0u32;
                while i < b.len() && b[i] == b'\'' {
                    order += 1;
                    i += 1;
                }
                // explicit order: x(5)
                if order == 0 && i < b.len() && b[i] == b'(' && name != "p" {
                    let mut j = i + 1;
                    while j < b.len() && b[j].is_ascii_digit() {
                        j += 1;
                    }
                    if j > i + 1 && j < b.len() && b[j] == b')' {
                        order = s[i + 1..j].parse().map_err(|_| Error::Parse { pos: i, msg: "bad order".into() })?;
                        i = j + 1;
                    }
                }
                out.push((start, Tok::Ident(name, order)));
                continue;
            }
            _ => return Err(Error::Parse { pos: start, msg: format!("unexpected character {c:?}") }),
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    vars: &'a JetVarSet,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.offset(), msg: msg.into() })
    }

    fn expr(&mut self) -> Result<QPoly> {
        let mut acc = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            self.term()?.neg()
        } else {
            self.term()?
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<QPoly> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc.mul(&self.factor()?);
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let at = self.offset();
                    let d = self.factor()?;
                    let c = as_constant(&d).filter(|c| !c.is_zero());
                    match c {
                        Some(c) => acc = acc.scale(&(BigRational::one() / c)),
                        None => return Err(Error::Parse { pos: at, msg: "division by a non-constant or zero".into() }),
                    }
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<QPoly> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let at = self.offset();
        let e = match self.peek() {
            Some(Tok::Int(n)) => {
                let n: u32 = n.try_into().map_err(|_| Error::Parse { pos: at, msg: "exponent too large".into() })?;
                self.pos += 1;
                n
            }
            _ => return self.err("expected an integer exponent"),
        };
        if neg {
            match as_constant(&base).filter(|c| !c.is_zero()) {
                Some(c) => Ok(Poly::constant(Rationals, (BigRational::one() / c).pow(e as i32))),
                None => Err(Error::Parse { pos: at, msg: "negative exponent on a non-constant".into() }),
            }
        } else {
            Ok(base.pow(e))
        }
    }

    fn atom(&mut self) -> Result<QPoly> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Poly::constant(Rationals, BigRational::from_integer(n)))
            }
            Some(Tok::Ident(name, order)) => {
                self.pos += 1;
                if name == "p" && order == 0 {
                    return Ok(Poly::from_i64(Rationals, self.vars.p() as i64));
                }
                let Some(base) = self.vars.index_of(&name) else {
                    return Err(Error::Parse { pos: at, msg: format!("unknown variable {name:?}") });
                };
                if order > self.vars.max_order() {
                    return Err(Error::Parse {
                        pos: at,
                        msg: format!("jet order {order} exceeds the bound {}", self.vars.max_order()),
                    });
                }
                Ok(Poly::var(Rationals, JetVar::new(base, order)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(t) => self.err(format!("unexpected token {t:?}")),
            None => self.err("unexpected end of input"),
        }
    }
}

fn as_constant(f: &QPoly) -> Option<BigRational> {
    if f.is_zero() {
        return Some(BigRational::zero());
    }
    if f.len() == 1 && f.degree() == Some(0) {
        return Some(f.constant_term());
    }
    None
}

/// Parse a polynomial in the variables of `vars`.
pub fn parse_poly(vars: &Arc<JetVarSet>, s: &str) -> Result<QPoly> {
    let toks = lex(s)?;
    if toks.is_empty() {
        return Err(Error::Parse { pos: 0, msg: "empty polynomial".into() });
    }
    let mut parser = Parser { toks, pos: 0, end: s.len(), vars };
    let e = parser.expr()?;
    if parser.pos != parser.toks.len() {
        return parser.err("trailing input");
    }
    Ok(e)
}

/// Split `c = u · p^k` with `u` a p-adic unit rational, writing a negative
/// `k` as an explicit `p^-k` factor.
fn coefficient_text(c: &BigRational, p: u64) -> (bool, String) {
    let neg = c.is_negative();
    let c = c.abs();
    let pb = BigInt::from(p);
    let mut den = c.denom().clone();
    let mut k = 0u32;
    while (&den % &pb).is_zero() {
        den /= &pb;
        k += 1;
    }
    let mut parts = Vec::new();
    if !(c.numer().is_one() && den.is_one() && k > 0) {
        parts.push(if den.is_one() { c.numer().to_string() } else { format!("{}/{den}", c.numer()) });
    }
    if k > 0 {
        parts.push(format!("p^-{k}"));
    }
    (neg, parts.join("*"))
}

/// Canonical text: terms in descending graded-lex order, coefficient first.
pub fn print_poly(vars: &JetVarSet, f: &QPoly) -> String {
    if f.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (m, c)) in f.terms().rev().enumerate() {
        let (neg, ctext) = coefficient_text(c, vars.p());
        let mono = monomial_text(vars, m);
        let body = match (ctext.as_str(), mono.is_empty()) {
            (_, true) => ctext.clone(),
            ("1", false) => mono,
            (_, false) => format!("{ctext}*{mono}"),
        };
        match (i, neg) {
            (0, false) => out.push_str(&body),
            (0, true) => {
                out.push('-');
                out.push_str(&body);
            }
            (_, false) => {
                out.push_str(" + ");
                out.push_str(&body);
            }
            (_, true) => {
                out.push_str(" - ");
                out.push_str(&body);
            }
        }
    }
    out
}

pub fn monomial_text(vars: &JetVarSet, m: &Monomial) -> String {
    m.pairs()
        .iter()
        .map(|&(v, e)| {
            let name = vars.var_name(v);
            if e == 1 {
                name
            } else {
                format!("{name}^{e}")
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deltapoly::DeltaPoly;

    #[test]
    fn round_trip() {
        let v = JetVarSet::new(&["x", "y"], 5, 3).unwrap();
        for s in ["x^2 + 3*x'", "-x*y + 1/2*p^-2*y''", "x(4)^2 - x(5)", "0", "-7"] {
            let f = DeltaPoly::parse(&v, s).unwrap();
            let printed = f.to_string();
            assert_eq!(DeltaPoly::parse(&v, &printed).unwrap(), f, "{s} -> {printed}");
        }
    }

    #[test]
    fn printer_is_canonical() {
        let v = JetVarSet::new(&["x"], 2, 2).unwrap();
        let f = DeltaPoly::parse(&v, "2*x' - x + 1/2").unwrap();
        assert_eq!(f.to_string(), "-x + 2*x' + p^-1");
        let g = DeltaPoly::parse(&v, "(x + x')^2").unwrap();
        assert_eq!(g.to_string(), "x^2 + 2*x*x' + x'^2");
    }

    #[test]
    fn parse_errors_report_position() {
        let v = JetVarSet::new(&["x"], 1, 2).unwrap();
        assert_eq!(
            DeltaPoly::parse(&v, "x + * 2").unwrap_err(),
            Error::Parse { pos: 4, msg: "unexpected token Star".into() }
        );
        assert!(matches!(DeltaPoly::parse(&v, "x''"), Err(Error::Parse { pos: 0, .. })));
        assert!(matches!(DeltaPoly::parse(&v, "z"), Err(Error::Parse { pos: 0, .. })));
        assert!(matches!(DeltaPoly::parse(&v, "x / x"), Err(Error::Parse { pos: 4, .. })));
        assert!(matches!(DeltaPoly::parse(&v, "(x"), Err(Error::Parse { pos: 2, .. })));
    }
}
