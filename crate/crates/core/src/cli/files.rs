//! File formats used by the command-line front end.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::deltapoly::{DeltaPoly, JetVarSet};
use crate::dlinear::DeltaMatrix;
use crate::error::{Error, Result};
use crate::jetspace::JetPresentation;
use crate::padic::{PadicCtx, PadicElem};

/// An element with its annotations: `value` is a signed decimal, or a
/// bracketed coefficient list over `W(F_{p^m})`, known mod `p^N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElemValue {
    pub p: u64,
    #[serde(rename = "N")]
    pub n: u32,
    pub m: u32,
    pub value: String,
}

impl ElemValue {
    pub fn of(x: &PadicElem) -> Self {
        ElemValue { p: x.p(), n: x.prec(), m: x.ctx().ext_degree(), value: x.to_string() }
    }

    pub fn to_elem(&self, ctx: &Arc<PadicCtx>) -> Result<PadicElem> {
        if ctx.p() != self.p || ctx.ext_degree() != self.m {
            return Err(Error::ContextMismatch);
        }
        Ok(parse_elem(ctx, &self.value)?.reduce_to(self.n))
    }
}

/// `a`, `-a` or `a/b`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let offset = s.len() - s.trim_start().len();
    let int = |part: &str, at: usize| {
        part.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::Parse { pos: at, msg: format!("expected an integer, found {part:?}") })
    };
    match t.split_once('/') {
        Some((a, b)) => {
            let den = int(b, offset + a.len() + 1)?;
            if den.is_zero() {
                return Err(Error::Parse { pos: offset + a.len() + 1, msg: "zero denominator".into() });
            }
            Ok(BigRational::new(int(a, offset)?, den))
        }
        None => Ok(BigRational::from_integer(int(t, offset)?)),
    }
}

/// A rational, or `[c0, c1, ..]` for an element of an extension.
pub fn parse_elem(ctx: &Arc<PadicCtx>, s: &str) -> Result<PadicElem> {
    let t = s.trim();
    if let Some(inner) = t.strip_prefix('[') {
        let inner =
            inner.strip_suffix(']').ok_or(Error::Parse { pos: s.len(), msg: "missing closing bracket".into() })?;
        let coeffs = inner
            .split(',')
            .map(|c| {
                c.trim().parse::<i64>().map_err(|_| Error::Parse { pos: 0, msg: format!("bad coefficient {c:?}") })
            })
            .collect::<Result<Vec<_>>>()?;
        if coeffs.len() > ctx.ext_degree() as usize {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients for an extension of degree {}",
                coeffs.len(),
                ctx.ext_degree()
            )));
        }
        return ctx.from_coeffs(&coeffs);
    }
    ctx.from_rational(&parse_rational(t)?)
}

/// Split a comma separated list, keeping bracketed groups together.
pub fn split_list(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for ch in s.trim().chars() {
        match ch {
            '[' => depth += 1,
            ']' => depth = depth.saturating_sub(1),
            _ => {}
        }
        if ch == ',' && depth == 0 {
            out.push(cur.trim().to_string());
            cur.clear();
        } else {
            cur.push(ch);
        }
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

/// A square matrix on disk, entries row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub p: u64,
    #[serde(rename = "N", default)]
    pub n: Option<u32>,
    #[serde(default = "one")]
    pub ext_degree: u32,
    pub size: usize,
    pub entries: Vec<String>,
}

fn one() -> u32 {
    1
}

impl MatrixFile {
    pub fn of(a: &DeltaMatrix) -> Self {
        MatrixFile {
            p: a.ctx().p(),
            n: Some(a.prec()),
            ext_degree: a.ctx().ext_degree(),
            size: a.size(),
            entries: a.entries().iter().map(|e| e.to_string()).collect(),
        }
    }

    pub fn to_matrix(&self, ctx: &Arc<PadicCtx>) -> Result<DeltaMatrix> {
        if ctx.p() != self.p || ctx.ext_degree() != self.ext_degree {
            return Err(Error::ContextMismatch);
        }
        if self.entries.len() != self.size * self.size {
            return Err(Error::LengthMismatch(self.size * self.size, self.entries.len()));
        }
        let entries = self.entries.iter().map(|s| parse_elem(ctx, s)).collect::<Result<Vec<_>>>()?;
        let a = DeltaMatrix::new(ctx, self.size, entries)?;
        Ok(match self.n {
            Some(k) => a.reduce_to(k),
            None => a,
        })
    }
}

/// Relations of a jet space on disk, in the order `f, δf, .., δ^n f`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JetFile {
    pub prime: u64,
    pub order: u32,
    pub base_vars: Vec<String>,
    pub vars: Vec<String>,
    pub relations: Vec<String>,
}

impl JetFile {
    pub fn of(j: &JetPresentation) -> Self {
        let vs = j.vars();
        JetFile {
            prime: vs.p(),
            order: j.order(),
            base_vars: vs.names().to_vec(),
            vars: vs.all_vars().into_iter().map(|v| vs.var_name(v)).collect(),
            relations: j.relations().iter().map(|r| r.to_string()).collect(),
        }
    }

    pub fn parse_relations(&self) -> Result<Vec<DeltaPoly>> {
        let vs = JetVarSet::new(&self.base_vars, self.order, self.prime)?;
        self.relations.iter().map(|r| DeltaPoly::parse(&vs, r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals() {
        assert_eq!(parse_rational(" -3/6").unwrap(), BigRational::new((-1).into(), 2.into()));
        assert!(matches!(parse_rational("1/0"), Err(Error::Parse { .. })));
        assert!(matches!(parse_rational("x"), Err(Error::Parse { pos: 0, .. })));
    }

    #[test]
    fn lists_keep_brackets() {
        assert_eq!(split_list("1, [2, 3], -4"), vec!["1", "[2, 3]", "-4"]);
        assert!(split_list("").is_empty());
    }

    #[test]
    fn elements_round_trip() {
        let ctx = PadicCtx::with_extension(3, 6, 2, None).unwrap();
        let x = ctx.from_coeffs(&[4, -7]).unwrap();
        let e = ElemValue::of(&x);
        assert_eq!(e.to_elem(&ctx).unwrap(), x);
    }

    #[test]
    fn matrices_round_trip() {
        let ctx = PadicCtx::new(5, 8).unwrap();
        let a = DeltaMatrix::from_i64(&ctx, 2, &[1, -2, 3, 7]).unwrap();
        let f = MatrixFile::of(&a);
        let text = serde_json::to_string(&f).unwrap();
        let back: MatrixFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_matrix(&ctx).unwrap(), a);
    }
}
