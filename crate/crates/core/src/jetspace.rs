//! Presentations of arithmetic jet spaces `J^n(X)` for affine schemes,
//! jets of points, and ideal membership mod p.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::deltapoly::{delta_modpoly, eval_modpoly, DeltaPoly, JetVarSet};
use crate::error::{Error, Result};
use crate::groebner::{GroebnerBasis, GroebnerCaps};
use crate::padic::{PadicCtx, PadicElem};
use crate::poly::{JetVar, ModPoly, ModRing};

/// `X = Spec R[x]/(f)` with relations of jet order 0.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemePresentation {
    vars: Arc<JetVarSet>,
    relations: Vec<DeltaPoly>,
    label: String,
}

/// On-disk form of a scheme: `{prime, vars, relations, label}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeFile {
    pub prime: u64,
    pub vars: Vec<String>,
    pub relations: Vec<String>,
    #[serde(default)]
    pub label: String,
}

impl SchemePresentation {
    pub fn new<S: AsRef<str>>(p: u64, vars: &[S], relations: &[&str], label: &str) -> Result<Self> {
        let vs = JetVarSet::new(vars, 0, p)?;
        let relations = relations.iter().map(|r| DeltaPoly::parse(&vs, r)).collect::<Result<Vec<_>>>()?;
        SchemePresentation::from_polys(vs, relations, label)
    }

    pub fn from_polys(vars: Arc<JetVarSet>, relations: Vec<DeltaPoly>, label: &str) -> Result<Self> {
        for r in &relations {
            if r.order().unwrap_or(0) > 0 {
                return Err(Error::InvalidArgument("scheme relations must have jet order 0".into()));
            }
            if !r.is_integral() {
                return Err(Error::NonIntegralInput);
            }
            if r.vars().names() != vars.names() || r.p() != vars.p() {
                return Err(Error::ContextMismatch);
            }
        }
        let vars = vars.with_order(0);
        let relations = relations.iter().map(|r| r.with_vars(&vars)).collect::<Result<Vec<_>>>()?;
        Ok(SchemePresentation { vars, relations, label: label.to_string() })
    }

    pub fn from_file(file: &SchemeFile) -> Result<Self> {
        let rel: Vec<&str> = file.relations.iter().map(|s| s.as_str()).collect();
        SchemePresentation::new(file.prime, &file.vars, &rel, &file.label)
    }

    pub fn to_file(&self) -> SchemeFile {
        SchemeFile {
            prime: self.vars.p(),
            vars: self.vars.names().to_vec(),
            relations: self.relations.iter().map(|r| r.to_string()).collect(),
            label: self.label.clone(),
        }
    }

    pub fn vars(&self) -> &Arc<JetVarSet> {
        &self.vars
    }

    pub fn relations(&self) -> &[DeltaPoly] {
        &self.relations
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn p(&self) -> u64 {
        self.vars.p()
    }
}

/// `J^n(X)`: variables `x^(j)` for `j ≤ n`, relations `δ^j f_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct JetPresentation {
    order: u32,
    vars: Arc<JetVarSet>,
    /// `relations[j][i] = δ^j f_i`.
    relations: Vec<Vec<DeltaPoly>>,
}

impl JetPresentation {
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn vars(&self) -> &Arc<JetVarSet> {
        &self.vars
    }

    /// `δ^j f_i`.
    pub fn relation(&self, i: usize, j: usize) -> &DeltaPoly {
        &self.relations[j][i]
    }

    /// All relations in the order `f, δf, ..., δ^n f`.
    pub fn relations(&self) -> Vec<&DeltaPoly> {
        self.relations.iter().flatten().collect()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.iter().map(|r| r.len()).sum()
    }

    /// Relations reduced mod `p^k`.
    pub fn relations_mod(&self, k: u32) -> Result<Vec<ModPoly>> {
        self.relations().iter().map(|r| r.to_mod(k)).collect()
    }
}

/// Relations of `J^n(X)` computed exactly by iterating δ.
pub fn build_jet(x: &SchemePresentation, n: u32) -> Result<JetPresentation> {
    let vars = x.vars.with_order(n);
    let mut relations: Vec<Vec<DeltaPoly>> =
        vec![x.relations.iter().map(|f| f.with_vars(&vars)).collect::<Result<_>>()?];
    for _ in 0..n {
        let next = relations.last().unwrap().iter().map(|f| f.delta()).collect::<Result<Vec<_>>>()?;
        relations.push(next);
    }
    Ok(JetPresentation { order: n, vars, relations })
}

/// Relations of `J^n(X)` modulo `p^k`, computed in `Z/p^(k+n)` and losing one
/// digit per application of δ. Returned in the order `f, δf, ..., δ^n f`.
pub fn build_jet_mod(x: &SchemePresentation, n: u32, k: u32) -> Result<Vec<Vec<ModPoly>>> {
    let ring = ModRing::new(x.p(), k + n);
    let mut out: Vec<Vec<ModPoly>> = vec![x
        .relations
        .iter()
        .map(|f| f.poly().to_mod(ring).ok_or(Error::NonIntegralInput))
        .collect::<Result<_>>()?];
    for _ in 0..n {
        let next = out.last().unwrap().iter().map(|f| delta_modpoly(f, n, None)).collect::<Result<Vec<_>>>()?;
        out.push(next);
    }
    Ok(out.into_iter().map(|level| level.into_iter().map(|f| f.reduce(k)).collect()).collect())
}

/// The jet `(α, δα, ..., δ^n α)` of a point, one vector per base variable.
pub fn jet_of_point(x: &SchemePresentation, n: u32, alpha: &[PadicElem]) -> Result<Vec<Vec<PadicElem>>> {
    if alpha.len() != x.vars.num_base() {
        return Err(Error::InvalidArgument(format!(
            "point has {} coordinates, scheme has {} variables",
            alpha.len(),
            x.vars.num_base()
        )));
    }
    let Some(first) = alpha.first() else {
        return Ok(Vec::new());
    };
    let ctx = first.ctx().clone();
    let prec = alpha.iter().map(|a| a.prec()).min().unwrap();
    if prec < n + 1 {
        return Err(Error::InsufficientPrecision { needed: n + 1, available: prec });
    }
    for (i, f) in x.relations.iter().enumerate() {
        let v = f.eval(&ctx, &|jv: JetVar| alpha[jv.base as usize].clone())?;
        if !v.reduce_to(prec.min(v.prec())).is_zero() {
            return Err(Error::NotOnScheme(format!("relation {i} does not vanish at the point")));
        }
    }
    alpha.iter().map(|a| a.jet(n)).collect()
}

/// Evaluate every relation of `J^n(X)` at a jet; returns the values.
pub fn eval_jet_relations(j: &JetPresentation, ctx: &Arc<PadicCtx>, jet: &[Vec<PadicElem>]) -> Result<Vec<PadicElem>> {
    let value = |v: JetVar| jet[v.base as usize][v.order as usize].clone();
    j.relations().iter().map(|r| r.eval(ctx, &value)).collect()
}

/// Evaluate relations given mod `p^k` at a jet.
pub fn eval_mod_relations(rel: &[Vec<ModPoly>], ctx: &Arc<PadicCtx>, jet: &[Vec<PadicElem>]) -> Vec<PadicElem> {
    let value = |v: JetVar| jet[v.base as usize][v.order as usize].clone();
    rel.iter().flatten().map(|r| eval_modpoly(r, ctx, &value)).collect()
}

/// Decide whether `g mod p` lies in the ideal of `J` mod p.
pub fn ideal_membership_mod_p(g: &DeltaPoly, j: &JetPresentation) -> Result<bool> {
    let gens = j.relations_mod(1)?;
    membership_mod_p(g, &j.vars, &gens, GroebnerCaps::default())
}

/// Membership of `g mod p` in the ideal generated by `gens` (mod p) in the
/// polynomial ring on all jet variables of `vars`.
pub fn membership_mod_p(g: &DeltaPoly, vars: &Arc<JetVarSet>, gens: &[ModPoly], caps: GroebnerCaps) -> Result<bool> {
    let gb = GroebnerBasis::compute(vars.p(), &vars.all_vars(), gens, caps)?;
    gb.contains(&g.to_mod(1)?)
}

/// Gröbner basis of the mod-p ideal of `J^n(X)`, computed from relations
/// built mod p (never forming the exact high-degree relations).
pub fn jet_ideal_mod_p(x: &SchemePresentation, n: u32, caps: GroebnerCaps) -> Result<GroebnerBasis> {
    let rel = build_jet_mod(x, n, 1)?;
    let gens: Vec<ModPoly> = rel.into_iter().flatten().collect();
    GroebnerBasis::compute(x.p(), &x.vars.with_order(n).all_vars(), &gens, caps)
}

/// Outcome of the Jacobian test of the fibration `J^n(X) → X` at one point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FibrationCheck {
    /// For each `j = 1..n`: rank mod p of `∂(δ^j f)/∂x^(j)` at the point.
    pub ranks: Vec<usize>,
    /// Rank of `∂f/∂x` mod p at the point.
    pub base_rank: usize,
    /// True when every level has the same full rank as the base, so the
    /// level-j relations can be solved for `|f|` of the coordinates `x^(j)`.
    pub solvable: bool,
}

/// Jacobian criterion at a jet point: the level-j relations are solvable for
/// the new coordinates mod p exactly when their Jacobian in `x^(j)` has the
/// rank of the base Jacobian.
pub fn fibration_check(j: &JetPresentation, ctx: &Arc<PadicCtx>, jet: &[Vec<PadicElem>]) -> Result<FibrationCheck> {
    let p = j.vars.p();
    let nb = j.vars.num_base();
    let value = |v: JetVar| jet[v.base as usize][v.order as usize].clone();
    let mut ranks = Vec::new();
    let mut base_rank = 0;
    for level in 0..=j.order {
        let mut rows = Vec::new();
        for f in &j.relations[level as usize] {
            let mut row = Vec::with_capacity(nb);
            for b in 0..nb {
                let d = f.poly().derivative(JetVar::new(b, level));
                let v = crate::deltapoly::eval_qpoly(&d, ctx, &value)?;
                row.push((v.residue()[0]) % p);
            }
            rows.push(row);
        }
        let r = rank_mod_p(rows, p);
        if level == 0 {
            base_rank = r;
        } else {
            ranks.push(r);
        }
    }
    let solvable = ranks.iter().all(|&r| r == base_rank);
    Ok(FibrationCheck { ranks, base_rank, solvable })
}

pub fn rank_mod_p(mut rows: Vec<Vec<u64>>, p: u64) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col] % p != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = crate::poly::ModRing::new(p, 1).inverse(rows[rank][col] % p).unwrap();
        for c in 0..ncols {
            rows[rank][c] = rows[rank][c] * inv % p;
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][col] % p != 0 {
                let f = rows[r][col] % p;
                for c in 0..ncols {
                    rows[r][c] = (rows[r][c] + p * p - f * rows[rank][c] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_of_trivial_scheme() {
        let x = SchemePresentation::new(5, &["x"], &["x"], "origin").unwrap();
        let j = build_jet(&x, 1).unwrap();
        let rel: Vec<String> = j.relations().iter().map(|r| r.to_string()).collect();
        assert_eq!(rel, vec!["x", "x'"]);
    }

    #[test]
    fn mu2_jet_relations() {
        let x = SchemePresentation::new(2, &["x"], &["(1 + x)^2 - 1"], "mu_2").unwrap();
        let j = build_jet(&x, 1).unwrap();
        assert_eq!(j.relation(0, 0), &DeltaPoly::parse(j.vars(), "x^2 + 2*x").unwrap());
        assert_eq!(j.relation(0, 1), &DeltaPoly::parse(j.vars(), "-x^2 - 2*x^3 + 2*x' + 2*x^2*x' + 2*x'^2").unwrap());
        let x2 = DeltaPoly::parse(j.vars(), "x^2").unwrap();
        assert!(ideal_membership_mod_p(&x2, &j).unwrap());
        let one = DeltaPoly::from_i64(j.vars(), 1);
        assert!(!ideal_membership_mod_p(&one, &j).unwrap());
    }

    #[test]
    fn affine_line_has_no_relations() {
        let x = SchemePresentation::new(3, &["x"], &[], "A1").unwrap();
        let j = build_jet(&x, 2).unwrap();
        assert_eq!(j.num_relations(), 0);
        assert_eq!(j.vars().all_vars().len(), 3);
    }

    #[test]
    fn gm_point_jet() {
        let ctx = PadicCtx::new(5, 8).unwrap();
        let x = SchemePresentation::new(5, &["x", "y"], &["x*y - 1"], "G_m").unwrap();
        let a = ctx.from_i64(3);
        let b = a.inverse().unwrap();
        let jet = jet_of_point(&x, 1, &[a, b]).unwrap();
        assert_eq!(jet[0][1].to_signed(), -48);
        let j = build_jet(&x, 1).unwrap();
        for v in eval_jet_relations(&j, &ctx, &jet).unwrap() {
            assert!(v.reduce_to(7).is_zero());
        }
        let bad = jet_of_point(&x, 1, &[ctx.from_i64(2), ctx.from_i64(2)]);
        assert!(matches!(bad, Err(Error::NotOnScheme(_))));
    }

    #[test]
    fn modular_build_matches_exact() {
        let x = SchemePresentation::new(3, &["x"], &["(1 + x)^3 - 1"], "mu_3").unwrap();
        let exact = build_jet(&x, 2).unwrap();
        let m = build_jet_mod(&x, 2, 2).unwrap();
        for (a, b) in exact.relations_mod(2).unwrap().iter().zip(m.iter().flatten()) {
            assert_eq!(a, b);
        }
    }
}
