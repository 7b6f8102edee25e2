//! The mod-p operator "pT_m(p)" on δ-p-symmetric series.
//!
//! For `f` in `k[[q]][q', .., q^(r)]` the sum `F = Σ_i f(x_i, .., x_i^(r))`
//! over `p` indeterminates is written, weight by weight, as a polynomial
//! `f_(p)` in `s_j^(k) ↦ δ^k(e_j(x)) mod p` (weights: `x^(k)` has weight
//! `p^k`, so `s_j^(k)` has weight `j·p^k`).

use std::collections::{BTreeMap, HashMap};

use num_integer::binomial;

use super::{DeltaSeries, JetExp, ModSeries, SeriesCaps};
use crate::deltapoly::{delta_qpoly, JetVarSet};
use crate::error::{Error, Result};
use crate::linalg::SparseSystem;
use crate::poly::{JetVar, ModPoly, ModRing, Monomial, Poly, QPoly, Rationals};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HeckeOptions {
    /// Total degree bound on monomials in the `s_j^(k)`.
    pub degree_bound: u32,
    /// Refuse to expand `δ^k(e_j)` beyond this many terms.
    pub max_image_terms: usize,
}

impl Default for HeckeOptions {
    fn default() -> Self {
        HeckeOptions { degree_bound: 8, max_image_terms: 2_000_000 }
    }
}

/// `f_(p)` as a polynomial mod p in `s_j^(k) = JetVar(j − 1, k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricSolution {
    pub p: u64,
    pub order: u32,
    pub poly: ModPoly,
}

impl SymmetricSolution {
    pub fn to_text(&self) -> String {
        let names: Vec<String> = (1..=self.p).map(|j| format!("s{j}")).collect();
        let vars = JetVarSet::new(&names, self.order, self.p).expect("valid names");
        let q = self.poly.lift(true);
        crate::text::print_poly(&vars, &q)
    }
}

fn x_weight(m: &Monomial, p: u64) -> u64 {
    m.pairs().iter().map(|&(v, e)| e as u64 * p.pow(v.order as u32)).sum()
}

struct Images {
    p: u64,
    order: u32,
    max_terms: usize,
    exact: HashMap<(usize, u32), QPoly>,
    reduced: HashMap<(usize, u32), ModPoly>,
    products: HashMap<Monomial, ModPoly>,
}

impl Images {
    fn new(p: u64, order: u32, max_terms: usize) -> Self {
        Images { p, order, max_terms, exact: HashMap::new(), reduced: HashMap::new(), products: HashMap::new() }
    }

    /// `e_j(x_1, .., x_p)`.
    fn elementary(&self, j: usize) -> QPoly {
        let p = self.p as usize;
        let mut out = Poly::zero(Rationals);
        let mut subset: Vec<usize> = (0..j).collect();
        loop {
            let m = Monomial::from_pairs(subset.iter().map(|&i| (JetVar::new(i, 0), 1)).collect());
            out.add_term(m, num_rational::BigRational::from_integer(1.into()));
            // next j-subset in lexicographic order
            let mut i = j;
            while i > 0 && subset[i - 1] == p - j + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            subset[i - 1] += 1;
            for t in i..j {
                subset[t] = subset[t - 1] + 1;
            }
        }
        out
    }

    fn exact(&mut self, j: usize, k: u32) -> Result<QPoly> {
        if let Some(f) = self.exact.get(&(j, k)) {
            return Ok(f.clone());
        }
        let f = if k == 0 {
            self.elementary(j)
        } else {
            let prev = self.exact(j, k - 1)?;
            let n = prev.len() as u64;
            let estimate = binomial(n + self.p - 1, self.p);
            if estimate > self.max_terms as u64 {
                return Err(Error::CapExceeded(format!(
                    "δ^{k}(e_{j}) would need about {estimate} terms (cap {})",
                    self.max_terms
                )));
            }
            delta_qpoly(&prev, self.p, self.order)?
        };
        self.exact.insert((j, k), f.clone());
        Ok(f)
    }

    fn var(&mut self, j: usize, k: u32) -> Result<ModPoly> {
        if let Some(f) = self.reduced.get(&(j, k)) {
            return Ok(f.clone());
        }
        let f = self.exact(j, k)?.to_mod(ModRing::new(self.p, 1)).ok_or(Error::NonIntegralInput)?;
        self.reduced.insert((j, k), f.clone());
        Ok(f)
    }

    fn monomial(&mut self, m: &Monomial) -> Result<ModPoly> {
        if let Some(f) = self.products.get(m) {
            return Ok(f.clone());
        }
        let fp = ModRing::new(self.p, 1);
        let out = match m.pairs().last() {
            None => Poly::one(fp),
            Some(&(v, _)) => {
                let (_, rest) = m.split_off(v);
                let e = m.exponent(v);
                let mut pairs = rest.pairs().to_vec();
                if e > 1 {
                    pairs.push((v, e - 1));
                }
                let smaller = self.monomial(&Monomial::from_pairs(pairs))?;
                smaller.mul(&self.var(v.base as usize + 1, v.order as u32)?)
            }
        };
        self.products.insert(m.clone(), out.clone());
        Ok(out)
    }
}

/// Monomials in the `s_j^(k)` of weight exactly `w` and total degree at most
/// `bound`; the flag reports whether the degree bound cut any off.
fn s_monomials(p: u64, order: u32, w: u64, bound: u32) -> (Vec<Monomial>, bool) {
    let mut vars: Vec<(JetVar, u64)> = Vec::new();
    for k in 0..=order {
        for j in 1..=p as usize {
            let wt = j as u64 * p.pow(k);
            if wt <= w {
                vars.push((JetVar::new(j - 1, k), wt));
            }
        }
    }
    let mut out = Vec::new();
    let mut pruned = false;
    fn rec(
        vars: &[(JetVar, u64)],
        idx: usize,
        rest: u64,
        deg_left: u32,
        cur: &mut Vec<(JetVar, u32)>,
        out: &mut Vec<Monomial>,
        pruned: &mut bool,
    ) {
        if rest == 0 {
            out.push(Monomial::from_pairs(cur.clone()));
            return;
        }
        if idx == vars.len() {
            return;
        }
        let (v, wt) = vars[idx];
        let max_e = rest / wt;
        for e in 0..=max_e {
            if e as u32 > deg_left {
                *pruned = true;
                break;
            }
            if e > 0 {
                cur.push((v, e as u32));
            }
            rec(vars, idx + 1, rest - e * wt, deg_left - e as u32, cur, out, pruned);
            if e > 0 {
                cur.pop();
            }
        }
    }
    rec(&vars, 0, w, bound, &mut Vec::new(), &mut out, &mut pruned);
    (out, pruned)
}

fn check_input(f: &ModSeries) -> Result<()> {
    if f.ring().k != 1 {
        return Err(Error::InvalidArgument("the operator is defined on series mod p".into()));
    }
    if f.terms().any(|(a, _, _)| a < 0) {
        return Err(Error::InvalidArgument("series must lie in k[[q]][q', ..]".into()));
    }
    Ok(())
}

/// Solve for `f_(p)`; fails with `NotDeltaPSymmetric` when no solution
/// exists and `DegreeBoundExceeded` when the degree bound may be the cause.
pub fn delta_p_symmetrize(f: &ModSeries, opts: &HeckeOptions) -> Result<SymmetricSolution> {
    check_input(f)?;
    let p = f.p();
    let order = f.jet_order();
    let fp = ModRing::new(p, 1);
    let mut by_weight: BTreeMap<u64, ModPoly> = BTreeMap::new();
    for (a, j, &c) in f.terms() {
        for i in 0..p as usize {
            let mut pairs = Vec::new();
            if a > 0 {
                pairs.push((JetVar::new(i, 0), a as u32));
            }
            for k in 1..=order {
                if j.exp(k) > 0 {
                    pairs.push((JetVar::new(i, k), j.exp(k)));
                }
            }
            let m = Monomial::from_pairs(pairs);
            let w = x_weight(&m, p);
            by_weight.entry(w).or_insert_with(|| Poly::zero(fp)).add_term(m, c);
        }
    }
    let mut images = Images::new(p, order, opts.max_image_terms);
    let mut solution = Poly::zero(fp);
    for (w, target) in by_weight {
        if target.is_zero() {
            continue;
        }
        let (cols, pruned) = s_monomials(p, order, w, opts.degree_bound);
        let mut sys: SparseSystem<Monomial> = SparseSystem::new(p);
        for (xm, &c) in target.terms() {
            sys.add_rhs(xm.clone(), c);
        }
        for (col, sm) in cols.iter().enumerate() {
            let img = images.monomial(sm)?;
            for (xm, &c) in img.terms() {
                sys.add(xm.clone(), col, c);
            }
        }
        match sys.solve() {
            Some(sol) => {
                for (col, c) in sol {
                    solution.add_term(cols[col].clone(), c);
                }
            }
            None if pruned => {
                return Err(Error::DegreeBoundExceeded(format!(
                    "no f_(p) of s-degree ≤ {} in weight {w}",
                    opts.degree_bound
                )))
            }
            None => return Err(Error::NotDeltaPSymmetric),
        }
    }
    Ok(SymmetricSolution { p, order, poly: solution })
}

pub fn is_delta_p_symmetric(f: &ModSeries, opts: &HeckeOptions) -> Result<bool> {
    match delta_p_symmetrize(f, opts) {
        Ok(_) => Ok(true),
        Err(Error::NotDeltaPSymmetric) => Ok(false),
        Err(e) => Err(e),
    }
}

/// `"pT_m(p)"f = f_(p)(0, .., 0, q, .., 0, .., 0, q^(r)) + p^m f(q^p, .., δ^r(q^p))` mod p.
pub fn hecke_p_tm(f: &ModSeries, m: u32, opts: &HeckeOptions) -> Result<ModSeries> {
    let sol = delta_p_symmetrize(f, opts)?;
    let p = f.p();
    let caps = f.caps();
    let fp = ModRing::new(p, 1);
    let last = p as usize - 1;
    let mut terms: Vec<(i64, JetExp, u64)> = Vec::new();
    for (mono, &c) in sol.poly.terms() {
        if mono.pairs().iter().any(|&(v, _)| v.base as usize != last) {
            continue;
        }
        let a = mono.exponent(JetVar::new(last, 0)) as i64;
        let exps: Vec<u32> = (1..=super::MAX_ORDER).map(|k| mono.exponent(JetVar::new(last, k))).collect();
        terms.push((a, JetExp::from_exps(&exps), c));
    }
    let mut out = DeltaSeries::from_terms(p, fp, caps, None, terms)?;
    if m == 0 {
        out = out.add(&frobenius_substitution(f, caps)?)?;
    }
    if let Some(v) = f.valid_to() {
        // an unknown input term of q-degree > v has weight > v and can only
        // reach output terms of weight > v/p
        let r = f.jet_order();
        let jet_weight = if r == 0 { 0 } else { caps.jet_degree as i64 * (p as i64).pow(r) };
        out = out.truncate(v.div_euclid(p as i64) - jet_weight);
    }
    Ok(out)
}

/// `f(q^p, δ(q^p), .., δ^r(q^p))` mod p.
fn frobenius_substitution(f: &ModSeries, caps: SeriesCaps) -> Result<ModSeries> {
    let p = f.p();
    let r = f.jet_order();
    let fp = ModRing::new(p, 1);
    let ring = ModRing::new(p, r + 1);
    let mut cur = DeltaSeries::q(p, ring, caps).pow(p)?;
    let mut iterates = vec![cur.reduce(fp)?];
    for _ in 0..r {
        cur = cur.delta()?;
        iterates.push(cur.reduce(fp)?);
    }
    let mut acc = DeltaSeries::zero(p, fp, caps);
    for (a, j, &c) in f.terms() {
        let mut t = iterates[0].pow(a as u64)?.scale(&c);
        for k in 1..=r {
            if j.exp(k) > 0 {
                t = t.mul(&iterates[k as usize].pow(j.exp(k) as u64)?)?;
            }
        }
        acc = acc.add(&t)?;
    }
    Ok(acc)
}
