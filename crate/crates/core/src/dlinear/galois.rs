//! Finite-precision δ-Galois groups of solutions of δ-linear equations.
//!
//! A candidate `c ∈ GL_n(O)` is accepted when the assignment `u ↦ uc`
//! fixing `O` is compatible with every `O`-linear relation among the
//! monomials of degree `≤ D` in the entries of `u` and with δ on the
//! entries of `u`. Compatibility with δ on generators suffices: the set
//! where two σ-twisted p-derivations agree is a subring.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::thread;

use super::DeltaMatrix;
use crate::error::{Error, Result};
use crate::padic::{PadicCtx, PadicElem};

/// The sub-δ-ring `O ⊂ W(F_q)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubRing {
    /// The p-adic integers.
    Zp,
    /// `W(F_{p^d})` for `d` dividing the extension degree; it is the
    /// δ-subring generated by Teichmüller lifts of `F_{p^d}`.
    Unramified { degree: u32 },
}

impl SubRing {
    /// The smallest unramified subring containing the given Teichmüller lifts.
    pub fn teichmuller_generated(ctx: &Arc<PadicCtx>, residues: &[Vec<u64>]) -> Self {
        let m = ctx.ext_degree();
        let d = (1..=m)
            .filter(|d| m % d == 0)
            .find(|&d| {
                residues.iter().all(|r| {
                    let t = ctx.teichmuller(r).reduce_to(1);
                    frobenius_pow(&t, d) == t
                })
            })
            .unwrap_or(m);
        if d == 1 {
            SubRing::Zp
        } else {
            SubRing::Unramified { degree: d }
        }
    }

    pub fn degree(&self) -> u32 {
        match self {
            SubRing::Zp => 1,
            SubRing::Unramified { degree } => *degree,
        }
    }

    pub fn contains(&self, x: &PadicElem) -> bool {
        frobenius_pow(x, self.degree()) == *x
    }

    fn validate(&self, ctx: &PadicCtx) -> Result<()> {
        let d = self.degree();
        if d == 0 || ctx.ext_degree() % d != 0 {
            return Err(Error::InvalidArgument(format!(
                "subring degree {d} does not divide extension degree {}",
                ctx.ext_degree()
            )));
        }
        Ok(())
    }

    /// A `Z_p`-basis `1, ζ, .., ζ^{d-1}` with `ζ` a Teichmüller generator
    /// of `F_{p^d}^×`, together with all Teichmüller units of `O`.
    fn basis_and_units(&self, ctx: &Arc<PadicCtx>) -> (Vec<PadicElem>, Vec<PadicElem>) {
        let d = self.degree();
        let q = ctx.residue_field_size();
        let qd = ctx.p().pow(d);
        let gen = primitive_teichmuller(ctx);
        let zeta = gen.pow((q - 1) / (qd - 1));
        let mut units = Vec::with_capacity((qd - 1) as usize);
        let mut cur = ctx.one();
        for _ in 0..qd - 1 {
            units.push(cur.clone());
            cur = cur.mul(&zeta);
        }
        let basis = units.iter().take(d as usize).cloned().collect();
        (basis, units)
    }
}

fn frobenius_pow(x: &PadicElem, k: u32) -> PadicElem {
    let mut y = x.clone();
    for _ in 0..k {
        y = y.frobenius();
    }
    y
}

fn primitive_teichmuller(ctx: &Arc<PadicCtx>) -> PadicElem {
    let q = ctx.residue_field_size();
    let m = ctx.ext_degree() as usize;
    let p = ctx.p();
    let order = q - 1;
    let prime_factors: Vec<u64> = (2..=order).filter(|&f| order % f == 0 && crate::padic::is_prime(f)).collect();
    for idx in 1..q {
        let mut res = Vec::with_capacity(m);
        let mut v = idx;
        for _ in 0..m {
            res.push(v % p);
            v /= p;
        }
        let t = ctx.teichmuller(&res).reduce_to(1);
        let one = ctx.one().reduce_to(1);
        if prime_factors.iter().all(|f| t.pow(order / f) != one) {
            return ctx.teichmuller(&res);
        }
    }
    ctx.one()
}

/// Search parameters.
#[derive(Clone, Debug)]
pub struct GaloisSearch {
    /// Degree bound `D` for monomial relations.
    pub degree: u32,
    /// Bound on the number of candidates examined.
    pub max_candidates: usize,
    pub threads: usize,
}

impl Default for GaloisSearch {
    fn default() -> Self {
        GaloisSearch { degree: 3, max_candidates: 20_000, threads: 4 }
    }
}

/// The verified set, qualified by the precision and degree bound used.
#[derive(Clone, Debug)]
pub struct GaloisSet {
    pub elements: Vec<DeltaMatrix>,
    pub precision: u32,
    pub degree: u32,
    pub candidates_checked: usize,
}

impl GaloisSet {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, c: &DeltaMatrix) -> bool {
        self.elements.iter().any(|e| e == c)
    }

    /// Closure under products and inverses.
    pub fn is_closed(&self) -> bool {
        self.elements.iter().all(|a| {
            let inv_ok = a.inverse().map(|i| self.contains(&i)).unwrap_or(false);
            inv_ok && self.elements.iter().all(|b| self.contains(&a.mul(b)))
        })
    }

    /// Residue-level fingerprints, used to compare sets across precisions.
    pub fn residues(&self) -> BTreeSet<Vec<Vec<u64>>> {
        self.elements.iter().map(|e| e.residue()).collect()
    }
}

/// Enumerate `c ∈ GL_n(O)` for which `u ↦ uc` extends to a δ-automorphism
/// of `O[u]`, at the precision of `u` minus one digit.
///
/// Candidates are the monomial matrices with Teichmüller unit entries in
/// `O` together with the Frobenius twists `u^{-1}φ^j(u)` that lie in `O`.
pub fn delta_galois_group(u: &DeltaMatrix, o: &SubRing, search: &GaloisSearch) -> Result<GaloisSet> {
    let ctx = u.ctx().clone();
    o.validate(&ctx)?;
    if u.prec() < 2 {
        return Err(Error::InsufficientPrecision { needed: 2, available: u.prec() });
    }
    let uinv = u.inverse()?;
    let n = u.size();
    let (basis, units) = o.basis_and_units(&ctx);

    let perms = permutations(n);
    let count = (units.len() as u128).pow(n as u32) * perms.len() as u128;
    if count > search.max_candidates as u128 {
        return Err(Error::SearchCapExceeded(format!(
            "{count} monomial candidates exceed cap {}",
            search.max_candidates
        )));
    }
    let mut candidates: Vec<DeltaMatrix> = Vec::new();
    for perm in &perms {
        let pm = DeltaMatrix::permutation(&ctx, perm);
        for idx in 0..units.len().pow(n as u32) {
            let mut v = idx;
            let d: Vec<PadicElem> = (0..n)
                .map(|_| {
                    let t = units[v % units.len()].clone();
                    v /= units.len();
                    t
                })
                .collect();
            candidates.push(DeltaMatrix::diagonal(&ctx, &d).mul(&pm));
        }
    }
    let mut twist = u.clone();
    for _ in 1..ctx.ext_degree() {
        twist = twist.frobenius();
        let c = uinv.mul(&twist);
        if c.entries().iter().all(|e| o.contains(e)) && !candidates.iter().any(|x| *x == c) {
            candidates.push(c);
        }
    }

    let prec = u.prec() - 1;
    let checker = Checker::new(u, &basis, search.degree, prec)?;
    let threads = search.threads.max(1);
    let chunk = candidates.len().div_ceil(threads).max(1);
    let accepted: Vec<DeltaMatrix> = thread::scope(|s| {
        let handles: Vec<_> = candidates
            .chunks(chunk)
            .map(|part| {
                let checker = &checker;
                let o = o;
                s.spawn(move || {
                    part.iter()
                        .filter(|c| {
                            c.is_invertible()
                                && c.entries().iter().all(|e| o.contains(e))
                                && checker.accepts(c).unwrap_or(false)
                        })
                        .map(|c| c.reduce_to(prec))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    });
    Ok(GaloisSet { elements: accepted, precision: prec, degree: search.degree, candidates_checked: candidates.len() })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..=rest.len() {
            let mut v = rest.clone();
            v.insert(pos, n - 1);
            out.push(v);
        }
    }
    out
}

/// Monomials of degree `≤ D` in `k` variables, as exponent vectors.
fn exponent_vectors(k: usize, d: u32) -> Vec<Vec<u32>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for e in 0..=d {
        for mut rest in exponent_vectors(k - 1, d - e) {
            rest.insert(0, e);
            out.push(rest);
        }
    }
    out
}

struct Checker {
    u: DeltaMatrix,
    basis: Vec<PadicElem>,
    exponents: Vec<Vec<u32>>,
    prec: u32,
    /// Order (as a power of p) of the span of the monomial vectors at `u`
    /// together with δ of the entries.
    base_rank: u64,
    du: DeltaMatrix,
}

impl Checker {
    fn new(u: &DeltaMatrix, basis: &[PadicElem], degree: u32, prec: u32) -> Result<Self> {
        let du = u.delta()?;
        let exponents = exponent_vectors(u.size() * u.size(), degree);
        let mut c = Checker { u: u.clone(), basis: basis.to_vec(), exponents, prec, base_rank: 0, du };
        let rows = c.rows(&c.u, &c.du, None);
        c.base_rank = module_log_order(rows, c.u.ctx().p(), prec);
        Ok(c)
    }

    fn monomial_values(&self, m: &DeltaMatrix) -> Vec<PadicElem> {
        let entries = m.entries();
        self.exponents
            .iter()
            .map(|ex| {
                let mut acc = m.ctx().one();
                for (e, &k) in entries.iter().zip(ex) {
                    if k > 0 {
                        acc = acc.mul(&e.pow(k as u64));
                    }
                }
                acc.reduce_to(self.prec)
            })
            .collect()
    }

    /// Rows `(b·μ(u) [, b·μ(uc)])` for basis elements `b` and monomials μ,
    /// followed by `(b·δu_ij [, b·δ(uc)_ij])`.
    fn rows(&self, u: &DeltaMatrix, du: &DeltaMatrix, twisted: Option<(&DeltaMatrix, &DeltaMatrix)>) -> Vec<Vec<u128>> {
        let left: Vec<PadicElem> = self.monomial_values(u).into_iter().chain(du.entries().iter().cloned()).collect();
        let right: Option<Vec<PadicElem>> = twisted
            .map(|(uc, duc)| self.monomial_values(uc).into_iter().chain(duc.entries().iter().cloned()).collect());
        let mut out = Vec::with_capacity(left.len() * self.basis.len());
        for b in &self.basis {
            for (i, l) in left.iter().enumerate() {
                let mut row: Vec<u128> = b.mul(l).reduce_to(self.prec).coeffs().to_vec();
                if let Some(r) = &right {
                    row.extend_from_slice(b.mul(&r[i]).reduce_to(self.prec).coeffs());
                }
                out.push(row);
            }
        }
        out
    }

    fn accepts(&self, c: &DeltaMatrix) -> Result<bool> {
        let uc = self.u.mul(c);
        let duc = uc.delta()?;
        let p = self.u.ctx().p();
        let graph = module_log_order(self.rows(&self.u, &self.du, Some((&uc, &duc))), p, self.prec);
        if graph != self.base_rank {
            return Ok(false);
        }
        // Bijectivity: the image span must be as large as the source span.
        let image = module_log_order(self.rows(&uc, &duc, None), p, self.prec);
        Ok(image == self.base_rank)
    }
}

/// `log_p` of the order of the `Z/p^k`-module spanned by the rows.
fn module_log_order(mut rows: Vec<Vec<u128>>, p: u64, k: u32) -> u64 {
    let p = p as u128;
    let md = p.pow(k);
    let val = |x: u128| -> u32 {
        if x % md == 0 {
            return k;
        }
        let mut v = 0;
        let mut y = x;
        while y % p == 0 {
            y /= p;
            v += 1;
        }
        v
    };
    let width = rows.first().map_or(0, |r| r.len());
    let mut cols: Vec<usize> = (0..width).collect();
    let mut total = 0u64;
    while !rows.is_empty() && !cols.is_empty() {
        // Pivot of minimal valuation.
        let mut best: Option<(u32, usize, usize)> = None;
        for (ri, r) in rows.iter().enumerate() {
            for (ci, &c) in cols.iter().enumerate() {
                let v = val(r[c]);
                if v < k && best.map_or(true, |b| v < b.0) {
                    best = Some((v, ri, ci));
                }
            }
        }
        let Some((v, ri, ci)) = best else { break };
        let col = cols.remove(ci);
        let pivot = rows.swap_remove(ri);
        total += (k - v) as u64;
        let pv = p.pow(v);
        let unit = (pivot[col] / pv) % md;
        let unit_inv = inverse_mod(unit, md);
        for r in rows.iter_mut() {
            if r[col] % md == 0 {
                continue;
            }
            let f = (r[col] / pv) % md * unit_inv % md;
            for &c in cols.iter().chain(std::iter::once(&col)) {
                let sub = f * (pivot[c] % md) % md;
                r[c] = (r[c] % md + md - sub) % md;
            }
        }
    }
    total
}

fn inverse_mod(a: u128, m: u128) -> u128 {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    old_s.rem_euclid(m as i128) as u128
}
