//! δ-Fourier series: Laurent series in `q` with polynomial dependence on
//! the jets `q', .., q^(r)`, truncated in q-degree and in jet degree.

mod hecke;
mod newform;

pub use hecke::{delta_p_symmetrize, hecke_p_tm, is_delta_p_symmetric, HeckeOptions, SymmetricSolution};
pub use newform::{
    fsharp_construction, fsharp_expansion, fsharp_formula, modular_parametrization, prime_to_p_part, x011_newform,
    FsharpReport, NewformData, Parametrization,
};

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::deltapoly::JetVarSet;
use crate::error::{Error, Result};
use crate::poly::{CoeffRing, JetVar, ModRing, Monomial, QPoly, Rationals};

/// Largest supported jet order `r`.
pub const MAX_ORDER: u32 = 4;

/// Truncation caps `(M, D, r)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesCaps {
    /// Terms of q-degree above `M` are dropped.
    pub q_degree: i64,
    /// Terms of total degree above `D` in the jets are dropped.
    pub jet_degree: u32,
    /// Highest jet `q^(r)` allowed.
    pub order: u32,
}

impl Default for SeriesCaps {
    fn default() -> Self {
        SeriesCaps { q_degree: 32, jet_degree: 8, order: 2 }
    }
}

impl SeriesCaps {
    pub fn new(q_degree: i64, jet_degree: u32, order: u32) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(Error::CapExceeded(format!("jet order {order} > {MAX_ORDER}")));
        }
        if jet_degree > 127 {
            return Err(Error::CapExceeded(format!("jet degree {jet_degree} > 127")));
        }
        Ok(SeriesCaps { q_degree, jet_degree, order })
    }
}

/// Exponents of `q', .., q^(4)`, one byte each.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct JetExp(u32);

impl JetExp {
    pub fn one() -> Self {
        JetExp(0)
    }

    /// `q^(k)` for `1 ≤ k ≤ 4`.
    pub fn var(k: u32) -> Self {
        assert!((1..=MAX_ORDER).contains(&k));
        JetExp(1 << (8 * (k - 1)))
    }

    pub fn from_exps(exps: &[u32]) -> Self {
        let mut v = 0u32;
        for (i, &e) in exps.iter().enumerate() {
            assert!(e < 128 && i < MAX_ORDER as usize);
            v |= e << (8 * i);
        }
        JetExp(v)
    }

    /// Exponent of `q^(k)`.
    pub fn exp(self, k: u32) -> u32 {
        (self.0 >> (8 * (k - 1))) & 0xff
    }

    pub fn degree(self) -> u32 {
        (1..=MAX_ORDER).map(|k| self.exp(k)).sum()
    }

    pub fn is_one(self) -> bool {
        self.0 == 0
    }

    /// Highest `k` with a nonzero exponent (0 for the empty monomial).
    pub fn max_order(self) -> u32 {
        (1..=MAX_ORDER).rev().find(|&k| self.exp(k) > 0).unwrap_or(0)
    }

    /// Weighted degree with `q^(k)` of weight `p^k`.
    pub fn weight(self, p: u64) -> u64 {
        (1..=MAX_ORDER).map(|k| self.exp(k) as u64 * p.pow(k)).sum()
    }

    /// Product; both factors must have exponents below 128.
    pub fn mul(self, other: JetExp) -> JetExp {
        JetExp(self.0 + other.0)
    }

    pub fn to_monomial(self) -> Monomial {
        Monomial::from_pairs(
            (1..=MAX_ORDER).filter(|&k| self.exp(k) > 0).map(|k| (JetVar::new(0, k), self.exp(k))).collect(),
        )
    }

    /// From a monomial in `q^(k)`, `k ≥ 1` (base variable 0).
    pub fn from_monomial(m: &Monomial) -> Result<Self> {
        let mut exps = [0u32; MAX_ORDER as usize];
        for &(v, e) in m.pairs() {
            if v.base != 0 || v.order == 0 || v.order as u32 > MAX_ORDER || e >= 128 {
                return Err(Error::InvalidArgument(format!("{v:?}^{e} is not a jet monomial")));
            }
            exps[v.order as usize - 1] = e;
        }
        Ok(JetExp::from_exps(&exps))
    }
}

/// Coefficient rings for series: the rationals (exact, p-integral in use)
/// and `Z/p^k`.
pub trait SeriesRing: CoeffRing {
    /// Exact division by `p`, in the ring returned by [`SeriesRing::lowered`].
    fn div_p(&self, p: u64, a: &Self::Elem) -> Option<Self::Elem>;
    /// The ring holding `δ` of an element (one digit less for `Z/p^k`).
    fn lowered(&self) -> Result<Self>;
    fn from_rational(&self, x: &BigRational) -> Option<Self::Elem>;
    /// A rational representative (balanced for `Z/p^k`).
    fn to_rational(&self, a: &Self::Elem) -> BigRational;
    /// `None` for the rationals, `Some(k)` for `Z/p^k`.
    fn digits(&self) -> Option<u32>;
}

impl SeriesRing for Rationals {
    fn div_p(&self, p: u64, a: &BigRational) -> Option<BigRational> {
        Some(a / BigRational::from_integer(BigInt::from(p)))
    }
    fn lowered(&self) -> Result<Self> {
        Ok(Rationals)
    }
    fn from_rational(&self, x: &BigRational) -> Option<BigRational> {
        Some(x.clone())
    }
    fn to_rational(&self, a: &BigRational) -> BigRational {
        a.clone()
    }
    fn digits(&self) -> Option<u32> {
        None
    }
}

impl SeriesRing for ModRing {
    fn div_p(&self, _p: u64, a: &u64) -> Option<u64> {
        ModRing::div_p(self, *a)
    }
    fn lowered(&self) -> Result<Self> {
        if self.k < 2 {
            return Err(Error::InsufficientPrecision { needed: 2, available: self.k });
        }
        Ok(self.lower())
    }
    fn from_rational(&self, x: &BigRational) -> Option<u64> {
        ModRing::from_rational(self, x)
    }
    fn to_rational(&self, a: &u64) -> BigRational {
        BigRational::from_integer(BigInt::from(self.signed(*a)))
    }
    fn digits(&self) -> Option<u32> {
        Some(self.k)
    }
}

type Key = (i64, JetExp);

/// A truncated δ-Fourier series `Σ c · q^a · (jet monomial)`.
///
/// `valid_to = Some(M)` means the series is known modulo `q^(M+1)`;
/// `None` means every term is known. Terms of jet degree above the cap
/// are always dropped, i.e. arithmetic happens modulo jet degree `> D`.
#[derive(Clone, Debug)]
pub struct DeltaSeries<R: SeriesRing> {
    p: u64,
    ring: R,
    caps: SeriesCaps,
    valid_to: Option<i64>,
    terms: BTreeMap<Key, R::Elem>,
}

pub type QSeries = DeltaSeries<Rationals>;
pub type ModSeries = DeltaSeries<ModRing>;

pub(crate) fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl<R: SeriesRing> PartialEq for DeltaSeries<R> {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.ring == other.ring && self.valid_to == other.valid_to && self.terms == other.terms
    }
}

impl<R: SeriesRing> DeltaSeries<R> {
    fn build(
        p: u64,
        ring: R,
        caps: SeriesCaps,
        valid_to: Option<i64>,
        raw: impl IntoIterator<Item = (Key, R::Elem)>,
    ) -> Self {
        let mut valid_to = valid_to.map(|v| v.min(caps.q_degree));
        let bound = valid_to.unwrap_or(caps.q_degree);
        let mut terms: BTreeMap<Key, R::Elem> = BTreeMap::new();
        for ((a, j), c) in raw {
            if ring.is_zero(&c) || j.degree() > caps.jet_degree {
                continue;
            }
            if a > bound {
                valid_to = Some(bound);
                continue;
            }
            match terms.get_mut(&(a, j)) {
                Some(slot) => *slot = ring.add(slot, &c),
                None => {
                    terms.insert((a, j), c);
                }
            }
        }
        terms.retain(|_, c| !ring.is_zero(c));
        DeltaSeries { p, ring, caps, valid_to, terms }
    }

    pub fn zero(p: u64, ring: R, caps: SeriesCaps) -> Self {
        DeltaSeries { p, ring, caps, valid_to: None, terms: BTreeMap::new() }
    }

    /// `c · q^a · jet`.
    pub fn monomial(p: u64, ring: R, caps: SeriesCaps, a: i64, jet: JetExp, c: R::Elem) -> Result<Self> {
        if jet.max_order() > caps.order {
            return Err(Error::OrderOverflow { needed: jet.max_order(), max: caps.order });
        }
        Ok(Self::build(p, ring, caps, None, [((a, jet), c)]))
    }

    pub fn constant(p: u64, ring: R, caps: SeriesCaps, c: R::Elem) -> Self {
        Self::build(p, ring, caps, None, [((0, JetExp::one()), c)])
    }

    /// The series `q`.
    pub fn q(p: u64, ring: R, caps: SeriesCaps) -> Self {
        let one = ring.one();
        Self::build(p, ring, caps, None, [((1, JetExp::one()), one)])
    }

    /// From terms `(q-exponent, jet, coefficient)`.
    pub fn from_terms(
        p: u64,
        ring: R,
        caps: SeriesCaps,
        valid_to: Option<i64>,
        terms: impl IntoIterator<Item = (i64, JetExp, R::Elem)>,
    ) -> Result<Self> {
        let terms: Vec<_> = terms.into_iter().collect();
        if let Some(j) = terms.iter().map(|t| t.1.max_order()).max() {
            if j > caps.order {
                return Err(Error::OrderOverflow { needed: j, max: caps.order });
            }
        }
        Ok(Self::build(p, ring, caps, valid_to, terms.into_iter().map(|(a, j, c)| ((a, j), c))))
    }

    /// From a polynomial in `q = JetVar(0,0)` and its jets, with rational
    /// coefficients mapped into the ring.
    pub fn from_poly(p: u64, ring: R, caps: SeriesCaps, f: &QPoly) -> Result<Self> {
        let mut terms = Vec::with_capacity(f.len());
        for (m, c) in f.terms() {
            let (a, rest) = m.split_off(JetVar::new(0, 0));
            let c = ring.from_rational(c).ok_or(Error::NonIntegralInput)?;
            terms.push((a as i64, JetExp::from_monomial(&rest)?, c));
        }
        Self::from_terms(p, ring, caps, None, terms)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn caps(&self) -> SeriesCaps {
        self.caps
    }

    /// Highest q-degree through which the series is known; `None` if exact.
    pub fn valid_to(&self) -> Option<i64> {
        self.valid_to
    }

    /// Same series, declared known only through `q^m`.
    pub fn truncate(&self, m: i64) -> Self {
        Self::build(
            self.p,
            self.ring.clone(),
            self.caps,
            Some(min_opt(self.valid_to, Some(m)).unwrap()),
            self.terms.clone(),
        )
    }

    pub fn with_caps(&self, caps: SeriesCaps) -> Result<Self> {
        let terms: Vec<_> = self.terms.iter().map(|(&(a, j), c)| (a, j, c.clone())).collect();
        Self::from_terms(self.p, self.ring.clone(), caps, self.valid_to, terms)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, JetExp, &R::Elem)> {
        self.terms.iter().map(|(&(a, j), c)| (a, j, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, a: i64, jet: JetExp) -> R::Elem {
        self.terms.get(&(a, jet)).cloned().unwrap_or_else(|| self.ring.zero())
    }

    /// Lowest q-exponent present, or `valid_to + 1` for a truncated zero.
    pub fn low(&self) -> Option<i64> {
        self.terms.keys().map(|k| k.0).min().or(self.valid_to.map(|v| v + 1))
    }

    /// Highest jet order occurring.
    pub fn jet_order(&self) -> u32 {
        self.terms.keys().map(|k| k.1.max_order()).max().unwrap_or(0)
    }

    pub fn jet_degree(&self) -> u32 {
        self.terms.keys().map(|k| k.1.degree()).max().unwrap_or(0)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.p != other.p || self.ring != other.ring {
            return Err(Error::ContextMismatch);
        }
        Ok(())
    }

    fn merged_caps(&self, other: &Self) -> SeriesCaps {
        SeriesCaps {
            q_degree: self.caps.q_degree.min(other.caps.q_degree),
            jet_degree: self.caps.jet_degree.min(other.caps.jet_degree),
            order: self.caps.order.max(other.caps.order),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let terms = self.terms.iter().chain(other.terms.iter()).map(|(k, c)| (*k, c.clone()));
        Ok(Self::build(
            self.p,
            self.ring.clone(),
            self.merged_caps(other),
            min_opt(self.valid_to, other.valid_to),
            terms,
        ))
    }

    pub fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(k, c)| (*k, self.ring.neg(c)));
        Self::build(self.p, self.ring.clone(), self.caps, self.valid_to, terms)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &R::Elem) -> Self {
        let terms = self.terms.iter().map(|(k, x)| (*k, self.ring.mul(x, c)));
        Self::build(self.p, self.ring.clone(), self.caps, self.valid_to, terms)
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self.scale(&self.ring.from_i64(n))
    }

    /// Multiply by `q^k`.
    pub fn shift(&self, k: i64) -> Self {
        let terms = self.terms.iter().map(|(&(a, j), c)| ((a + k, j), c.clone()));
        Self::build(self.p, self.ring.clone(), self.caps, self.valid_to.map(|v| v + k), terms)
    }

    fn product_valid(&self, other: &Self) -> Option<i64> {
        if (self.terms.is_empty() && self.valid_to.is_none()) || (other.terms.is_empty() && other.valid_to.is_none()) {
            return None;
        }
        let a = self.valid_to.map(|v| v + other.low().unwrap());
        let b = other.valid_to.map(|v| v + self.low().unwrap());
        min_opt(a, b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let caps = self.merged_caps(other);
        let valid = self.product_valid(other);
        let bound = valid.unwrap_or(caps.q_degree).min(caps.q_degree);
        let mut acc: HashMap<Key, R::Elem> = HashMap::new();
        let mut overflow = false;
        for (&(a, ja), ca) in &self.terms {
            for (&(b, jb), cb) in &other.terms {
                if ja.degree() + jb.degree() > caps.jet_degree {
                    continue;
                }
                if a + b > bound {
                    overflow = true;
                    continue;
                }
                let c = self.ring.mul(ca, cb);
                let slot = acc.entry((a + b, ja.mul(jb))).or_insert_with(|| self.ring.zero());
                *slot = self.ring.add(slot, &c);
            }
        }
        let valid = if overflow { Some(bound) } else { valid };
        Ok(Self::build(self.p, self.ring.clone(), caps, valid, acc))
    }

    pub fn pow(&self, mut e: u64) -> Result<Self> {
        let mut result = Self::constant(self.p, self.ring.clone(), self.caps, self.ring.one());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Multiplicative inverse of a q-only series whose lowest coefficient is a unit.
    pub fn inverse(&self) -> Result<Self> {
        if self.terms.keys().any(|k| !k.1.is_one()) {
            return Err(Error::InvalidArgument("inverse of a series with jet terms".into()));
        }
        let Some((&(a0, _), c0)) = self.terms.iter().next() else {
            return Err(Error::NotInvertible);
        };
        let lead_inv = invert_elem(&self.ring, c0).ok_or(Error::NotInvertible)?;
        // self = c0 q^a0 (1 + h); inverse = c0^{-1} q^{-a0} Σ (−h)^n
        let h = self.shift(-a0).scale(&lead_inv).sub(&Self::constant(
            self.p,
            self.ring.clone(),
            self.caps,
            self.ring.one(),
        ))?;
        let neg_h = h.neg();
        let bound = self.caps.q_degree + a0;
        let mut acc = Self::constant(self.p, self.ring.clone(), self.caps, self.ring.one());
        let mut pw = acc.clone();
        let span = (bound - h.low().unwrap_or(bound + 1)).max(0) + 1;
        for _ in 0..span {
            pw = pw.mul(&neg_h)?;
            if pw.is_zero() {
                break;
            }
            acc = acc.add(&pw)?;
        }
        let valid = self.valid_to.map(|v| v - 2 * a0);
        let out = acc.scale(&lead_inv).shift(-a0);
        Ok(Self::build(self.p, self.ring.clone(), self.caps, min_opt(valid, out.valid_to), out.terms))
    }

    /// `Σ coeffs[n] · x^n` for `n ≥ 1` and `x` without negative q-powers.
    /// Powers are added until they vanish or lie beyond the known range;
    /// fails if a needed power has no coefficient.
    pub fn compose(coeffs: &[R::Elem], x: &Self) -> Result<Self> {
        if x.low().map_or(false, |l| l < 0) {
            return Err(Error::InvalidArgument("composition with a series that has a pole".into()));
        }
        let bound = min_opt(x.valid_to, Some(x.caps.q_degree)).unwrap();
        let mut acc = Self::zero(x.p, x.ring.clone(), x.caps);
        let mut pw = Self::constant(x.p, x.ring.clone(), x.caps, x.ring.one());
        for n in 1.. {
            pw = pw.mul(x)?;
            if pw.is_zero() || pw.low().map_or(true, |l| l > bound) {
                break;
            }
            let c = coeffs.get(n).ok_or_else(|| {
                Error::TruncationOverflow(format!(
                    "power series with {} coefficients does not converge on the truncated argument",
                    coeffs.len()
                ))
            })?;
            acc = acc.add(&pw.scale(c))?;
        }
        if x.valid_to.is_some() {
            acc = acc.truncate(bound);
        }
        Ok(acc)
    }

    /// Coefficientwise map into another ring.
    pub fn reduce<S: SeriesRing>(&self, ring: S) -> Result<DeltaSeries<S>> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (&k, c) in &self.terms {
            let r = self.ring.to_rational(c);
            terms.push((k, ring.from_rational(&r).ok_or(Error::NonIntegralInput)?));
        }
        Ok(DeltaSeries::build(self.p, ring, self.caps, self.valid_to, terms))
    }

    /// Set all jets to zero (the Fourier expansion).
    pub fn fourier_part(&self) -> Self {
        let terms = self.terms.iter().filter(|(k, _)| k.1.is_one()).map(|(k, c)| (*k, c.clone()));
        Self::build(self.p, self.ring.clone(), self.caps, self.valid_to, terms)
    }

    /// `Σ c_n q^n ↦ Σ c_{np} q^n`, applied to the q-exponent of every term.
    pub fn u_operator(&self) -> Self {
        let p = self.p as i64;
        let terms =
            self.terms.iter().filter(|(k, _)| k.0.rem_euclid(p) == 0).map(|(&(a, j), c)| ((a / p, j), c.clone()));
        Self::build(self.p, self.ring.clone(), self.caps, self.valid_to.map(|v| v.div_euclid(p)), terms)
    }

    /// The Fourier expansion is killed by `U`.
    pub fn is_primitive(&self) -> bool {
        self.fourier_part().u_operator().is_zero()
    }

    /// Agreement of all terms of q-degree at most `m`.
    pub fn agrees_through(&self, other: &Self, m: i64) -> bool {
        let cut = |s: &Self| -> BTreeMap<Key, R::Elem> {
            s.terms.iter().filter(|(k, _)| k.0 <= m).map(|(k, c)| (*k, c.clone())).collect()
        };
        cut(self) == cut(other)
    }

    /// Frobenius lift: `q ↦ q^p + p q'`, `q^(k) ↦ (q^(k))^p + p q^(k+1)`,
    /// identity on coefficients.
    pub fn phi(&self) -> Result<Self> {
        let p = self.p;
        let pc = self.ring.from_i64(p as i64);
        let needs_jet = !self.ring.is_zero(&pc);
        let top = self.jet_order();
        if needs_jet && !self.terms.is_empty() && top + 1 > self.caps.order {
            return Err(Error::OrderOverflow { needed: top + 1, max: self.caps.order });
        }
        let caps = self.caps;
        let ring = self.ring.clone();
        let mono = |a: i64, j: JetExp, c: R::Elem| Self::build(p, ring.clone(), caps, None, [((a, j), c)]);
        let one = ring.one();
        // φ(q) and φ(q)^{-1} = q^{-p} Σ_j (−p q' q^{-p})^j
        let phi_q = mono(p as i64, JetExp::one(), one.clone()).add(&mono(0, JetExp::var(1), pc.clone()))?;
        let phi_q_inv = {
            let mut acc = Self::zero(p, ring.clone(), caps);
            let mut c = one.clone();
            for j in 0..=caps.jet_degree {
                acc = acc.add(&mono(-(p as i64) * (j as i64 + 1), JetExp::from_exps(&[j]), c.clone()))?;
                c = ring.mul(&c, &ring.neg(&pc));
                if ring.is_zero(&c) {
                    break;
                }
            }
            acc
        };
        let phi_jet = |k: u32| -> Result<Self> {
            let mut s = mono(0, pow_exp(k, p as u32), one.clone());
            if needs_jet {
                s = s.add(&mono(0, JetExp::var(k + 1), pc.clone()))?;
            }
            Ok(s)
        };
        let mut q_pows: HashMap<i64, Self> = HashMap::new();
        let mut jet_pows: HashMap<(u32, u32), Self> = HashMap::new();
        let mut by_a: BTreeMap<i64, Vec<(JetExp, R::Elem)>> = BTreeMap::new();
        for (&(a, j), c) in &self.terms {
            by_a.entry(a).or_default().push((j, c.clone()));
        }
        let mut acc = Self::zero(p, ring.clone(), caps);
        for (a, list) in by_a {
            let mut inner = Self::zero(p, ring.clone(), caps);
            for (j, c) in list {
                let mut t = Self::constant(p, ring.clone(), caps, c);
                for k in 1..=MAX_ORDER {
                    let e = j.exp(k);
                    if e == 0 {
                        continue;
                    }
                    if !jet_pows.contains_key(&(k, e)) {
                        let v = phi_jet(k)?.pow(e as u64)?;
                        jet_pows.insert((k, e), v);
                    }
                    t = t.mul(&jet_pows[&(k, e)])?;
                }
                inner = inner.add(&t)?;
            }
            if !q_pows.contains_key(&a) {
                let v = if a >= 0 { phi_q.pow(a as u64)? } else { phi_q_inv.pow((-a) as u64)? };
                q_pows.insert(a, v);
            }
            acc = acc.add(&inner.mul(&q_pows[&a])?)?;
        }
        let valid = self.valid_to.map(|m| {
            let d = caps.jet_degree as i64;
            let lowest = if m + 1 >= 0 { p as i64 * (m + 1 - d).max(0) } else { p as i64 * (m + 1 - d) };
            lowest - 1
        });
        Ok(Self::build(p, ring, caps, min_opt(valid, acc.valid_to), acc.terms))
    }

    /// The p-derivation with `δq = q'`, `δq^(j) = q^(j+1)`:
    /// `δf = (φ(f) − f^p)/p`, landing in the lowered coefficient ring.
    pub fn delta(&self) -> Result<Self> {
        let p = self.p;
        if self.ring.digits().is_none() {
            for c in self.terms.values() {
                let r = self.ring.to_rational(c);
                if r.denom().is_multiple_of(&BigInt::from(p)) {
                    return Err(Error::NonIntegralInput);
                }
            }
        }
        let diff = self.phi()?.sub(&self.pow(p)?)?;
        let lower = self.ring.lowered()?;
        let mut terms = Vec::with_capacity(diff.terms.len());
        for (&k, c) in &diff.terms {
            let d = self.ring.div_p(p, c).ok_or(Error::InexactDivision)?;
            let d = lower.from_rational(&self.ring.to_rational(&d)).ok_or(Error::InexactDivision)?;
            terms.push((k, d));
        }
        Ok(Self::build(p, lower, self.caps, diff.valid_to, terms))
    }

    /// Names for printing: `q, q', q'', q''', q(4)`.
    pub fn jet_names(&self) -> Arc<JetVarSet> {
        JetVarSet::new(&["q"], self.caps.order, self.p).expect("q is a valid name")
    }

    fn term_text(a: i64, j: JetExp, names: &JetVarSet) -> String {
        let mut parts = Vec::new();
        if a == 1 {
            parts.push("q".to_string());
        } else if a != 0 {
            parts.push(format!("q^{a}"));
        }
        if !j.is_one() {
            parts.push(crate::text::monomial_text(names, &j.to_monomial()));
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    /// Canonical file form.
    pub fn to_file(&self) -> SeriesFile {
        let names = self.jet_names();
        let terms = self
            .terms
            .iter()
            .map(|(&(a, j), c)| SeriesTerm {
                q: a,
                jet: if j.is_one() { "1".into() } else { crate::text::monomial_text(&names, &j.to_monomial()) },
                coeff: self.ring.to_rational(c).to_string(),
            })
            .collect();
        SeriesFile {
            p: self.p,
            mode: match self.ring.digits() {
                None => "rational".into(),
                Some(k) => format!("mod p^{k}"),
            },
            m: self.valid_to,
            d: self.caps.jet_degree,
            r: self.caps.order,
            q_cap: self.caps.q_degree,
            terms,
        }
    }
}

fn pow_exp(k: u32, e: u32) -> JetExp {
    let mut exps = [0u32; MAX_ORDER as usize];
    exps[k as usize - 1] = e;
    JetExp::from_exps(&exps)
}

fn invert_elem<R: SeriesRing>(ring: &R, c: &R::Elem) -> Option<R::Elem> {
    let r = ring.to_rational(c);
    if r.is_zero() {
        return None;
    }
    ring.from_rational(&r.recip())
}

impl<R: SeriesRing> fmt::Display for DeltaSeries<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.jet_names();
        let mut first = true;
        for (&(a, j), c) in &self.terms {
            let r = self.ring.to_rational(c);
            let (neg, mag) = if r.is_negative() { (true, -r) } else { (false, r) };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let body = Self::term_text(a, j, &names);
            if mag.is_one() {
                write!(f, "{body}")?;
            } else if body == "1" {
                write!(f, "{mag}")?;
            } else {
                write!(f, "{mag}*{body}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        if let Some(m) = self.valid_to {
            write!(f, " + O(q^{})", m + 1)?;
        }
        Ok(())
    }
}

/// One term of a series file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub q: i64,
    pub jet: String,
    pub coeff: String,
}

/// Series on disk: header `{p, mode, M, D, r}` and sparse terms in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesFile {
    pub p: u64,
    pub mode: String,
    /// Known through `q^M`; absent when exact.
    #[serde(rename = "M")]
    pub m: Option<i64>,
    #[serde(rename = "D")]
    pub d: u32,
    pub r: u32,
    pub q_cap: i64,
    pub terms: Vec<SeriesTerm>,
}

impl SeriesFile {
    fn parse_terms<R: SeriesRing>(&self, ring: &R) -> Result<Vec<(i64, JetExp, R::Elem)>> {
        let names = JetVarSet::new(&["q"], self.r, self.p)?;
        let mut out = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let jet = if t.jet.trim() == "1" {
                JetExp::one()
            } else {
                let poly = crate::text::parse_poly(&names, &t.jet)?;
                let (m, _) = poly
                    .terms()
                    .next()
                    .filter(|_| poly.len() == 1)
                    .ok_or(Error::Parse { pos: 0, msg: format!("{:?} is not a jet monomial", t.jet) })?;
                JetExp::from_monomial(m)?
            };
            let c: BigRational =
                t.coeff.parse().map_err(|_| Error::Parse { pos: 0, msg: format!("bad coefficient {:?}", t.coeff) })?;
            out.push((t.q, jet, ring.from_rational(&c).ok_or(Error::NonIntegralInput)?));
        }
        Ok(out)
    }

    fn caps(&self) -> Result<SeriesCaps> {
        SeriesCaps::new(self.q_cap, self.d, self.r)
    }

    pub fn to_rational(&self) -> Result<QSeries> {
        if self.mode != "rational" {
            return Err(Error::InvalidArgument(format!("series mode is {:?}", self.mode)));
        }
        let terms = self.parse_terms(&Rationals)?;
        DeltaSeries::from_terms(self.p, Rationals, self.caps()?, self.m, terms)
    }

    pub fn to_mod(&self) -> Result<ModSeries> {
        let k: u32 = self
            .mode
            .strip_prefix("mod p^")
            .and_then(|s| s.parse().ok())
            .ok_or(Error::Parse { pos: 0, msg: format!("bad series mode {:?}", self.mode) })?;
        let ring = ModRing::new(self.p, k);
        let terms = self.parse_terms(&ring)?;
        DeltaSeries::from_terms(self.p, ring, self.caps()?, self.m, terms)
    }
}

/// `f¹ = Σ_{n=1}^{D} (−1)^(n−1) p^(n−1)/n (q'/q^p)^n`, complete up to the jet-degree cap.
pub fn f1_series(p: u64, caps: SeriesCaps) -> Result<QSeries> {
    if caps.order < 1 {
        return Err(Error::OrderOverflow { needed: 1, max: caps.order });
    }
    let terms = (1..=caps.jet_degree).map(|n| {
        let sign = if n % 2 == 1 { 1 } else { -1 };
        let c = BigRational::new(BigInt::from(sign) * BigInt::from(p).pow(n - 1), BigInt::from(n));
        (-(p as i64) * n as i64, JetExp::from_exps(&[n]), c)
    });
    let caps = SeriesCaps { q_degree: caps.q_degree.max(0), ..caps };
    DeltaSeries::from_terms(p, Rationals, caps, None, terms)
}

/// Applies δ with `δq = q'` to a series.
pub fn delta_on_series<R: SeriesRing>(s: &DeltaSeries<R>) -> Result<DeltaSeries<R>> {
    s.delta()
}

/// The mod-p residue field ring.
pub fn fp(p: u64) -> ModRing {
    ModRing::new(p, 1)
}

/// Parse a polynomial in `q` and its jets (nonnegative exponents) as a series.
pub fn parse_series<R: SeriesRing>(p: u64, ring: R, caps: SeriesCaps, s: &str) -> Result<DeltaSeries<R>> {
    let names = JetVarSet::new(&["q"], caps.order, p)?;
    let f = crate::text::parse_poly(&names, s)?;
    DeltaSeries::from_poly(p, ring, caps, &f)
}

/// Residue of a rational coefficient, as a small integer (tests and reports).
pub fn coeff_to_i64<R: SeriesRing>(ring: &R, c: &R::Elem) -> Option<i64> {
    let r = ring.to_rational(c);
    if r.is_integer() {
        r.to_integer().to_i64()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn caps() -> SeriesCaps {
        SeriesCaps { q_degree: 40, jet_degree: 8, order: 2 }
    }

    fn qr(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn delta_of_q_is_q_prime() {
        for p in [2u64, 3, 5] {
            let q = QSeries::q(p, Rationals, caps());
            let d = q.delta().unwrap();
            let expected = QSeries::monomial(p, Rationals, caps(), 0, JetExp::var(1), BigRational::one()).unwrap();
            assert!(d.agrees_through(&expected, 40), "p={p}: {d}");
        }
    }

    #[test]
    fn delta_of_q_squared_at_two() {
        let q2 = QSeries::q(2, Rationals, caps()).pow(2).unwrap();
        let d = q2.delta().unwrap();
        let two = BigRational::from_integer(BigInt::from(2));
        assert_eq!(d.coeff(2, JetExp::var(1)), two);
        assert_eq!(d.coeff(0, JetExp::from_exps(&[2])), two);
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn delta_kills_teichmuller_constants() {
        // 1 and −1 are roots of unity in Z_3
        for c in [1i64, -1] {
            let s = QSeries::constant(3, Rationals, caps(), BigRational::from_integer(BigInt::from(c)));
            assert!(s.delta().unwrap().is_zero());
        }
        let ring = ModRing::new(5, 6);
        let t = crate::padic::PadicCtx::new(5, 6).unwrap().teichmuller_int(2).to_bigint();
        let s = ModSeries::constant(5, ring, caps(), ring.from_bigint(&t));
        assert!(s.delta().unwrap().is_zero());
    }

    #[test]
    fn delta_axioms_on_series() {
        let p = 3;
        let c = SeriesCaps { q_degree: 12, jet_degree: 6, order: 2 };
        let a = parse_series(p, Rationals, c, "q + 2*q^2 - q'").unwrap();
        let b = parse_series(p, Rationals, c, "1 + q^3 + 3*q*q'").unwrap();
        let da = a.delta().unwrap();
        let db = b.delta().unwrap();
        // δ(a+b) = δa + δb − Σ_{0<i<p} binom(p,i)/p a^i b^{p−i}
        let mut cp = QSeries::zero(p, Rationals, c);
        for i in 1..p {
            let coeff = qr(num_integer::binomial(p as i64, i as i64), p as i64);
            cp = cp.add(&a.pow(i).unwrap().mul(&b.pow(p - i).unwrap()).unwrap().scale(&coeff)).unwrap();
        }
        let lhs = a.add(&b).unwrap().delta().unwrap();
        let rhs = da.add(&db).unwrap().sub(&cp).unwrap();
        let m = min_opt(lhs.valid_to(), rhs.valid_to()).unwrap_or(12);
        assert!(m >= 6);
        assert!(lhs.agrees_through(&rhs, m));
        // δ(ab) = a^p δb + b^p δa + p δa δb
        let lhs = a.mul(&b).unwrap().delta().unwrap();
        let rhs = a
            .pow(p)
            .unwrap()
            .mul(&db)
            .unwrap()
            .add(&b.pow(p).unwrap().mul(&da).unwrap())
            .unwrap()
            .add(&da.mul(&db).unwrap().scale_int(p as i64))
            .unwrap();
        let m = min_opt(lhs.valid_to(), rhs.valid_to()).unwrap_or(12);
        assert!(lhs.agrees_through(&rhs, m));
    }

    #[test]
    fn mod_delta_matches_rational_delta() {
        let p = 5;
        let c = SeriesCaps { q_degree: 20, jet_degree: 6, order: 2 };
        let a = parse_series(p, Rationals, c, "q + 7*q^2 - 3*q^5 + q*q'").unwrap();
        let ring = ModRing::new(p, 4);
        let via_mod = a.reduce(ring).unwrap().delta().unwrap();
        let via_q = a.delta().unwrap().reduce(ring.lower()).unwrap();
        assert!(via_mod.agrees_through(&via_q, 20));
    }

    #[test]
    fn f1_expansion() {
        for p in [2u64, 3, 5, 7] {
            let f = f1_series(p, caps()).unwrap();
            assert_eq!(f.coeff(-(p as i64), JetExp::var(1)), BigRational::one());
            assert_eq!(f.coeff(-2 * p as i64, JetExp::from_exps(&[2])), qr(-(p as i64), 2));
            assert!(f.fourier_part().is_zero());
            for n in 1..=8u32 {
                let expected = qr(if n % 2 == 1 { 1 } else { -1 } * (p as i64).pow(n - 1), n as i64);
                assert_eq!(f.coeff(-(p as i64) * n as i64, JetExp::from_exps(&[n])), expected);
            }
        }
    }

    #[test]
    fn u_operator_basics() {
        let p = 3;
        let q = QSeries::q(p, Rationals, caps());
        assert!(q.u_operator().is_zero());
        let u = q.pow(3).unwrap().u_operator();
        assert_eq!(u, q);
        let s = parse_series(p, Rationals, caps(), "q + 2*q^2 + 5*q^4 + q^6 + 4*q^9").unwrap();
        let expected = parse_series(p, Rationals, caps(), "q^2 + 4*q^3").unwrap();
        assert_eq!(s.u_operator(), expected);
    }

    #[test]
    fn laurent_inverse() {
        let s = parse_series(5, Rationals, caps(), "q^2 + 3*q^3 - q^7").unwrap();
        let inv = s.inverse().unwrap();
        let prod = s.mul(&inv).unwrap();
        let one = QSeries::constant(5, Rationals, caps(), BigRational::one());
        assert!(prod.agrees_through(&one, prod.valid_to().unwrap()));
        assert!(prod.valid_to().unwrap() >= 30);
    }

    #[test]
    fn truncation_metadata() {
        let c = SeriesCaps { q_degree: 10, jet_degree: 3, order: 1 };
        let s = parse_series(2, Rationals, c, "q^6 + q'").unwrap();
        assert_eq!(s.valid_to(), None);
        let sq = s.mul(&s).unwrap();
        assert_eq!(sq.valid_to(), Some(10));
        assert_eq!(sq.coeff(6, JetExp::var(1)), BigRational::from_integer(BigInt::from(2)));
        let cube = sq.mul(&s).unwrap();
        assert_eq!(cube.coeff(0, JetExp::from_exps(&[3])), BigRational::one());
        // jet degree 4 is above the cap
        assert!(cube.mul(&s).unwrap().terms().all(|(_, j, _)| j.degree() <= 3));
        assert!(matches!(s.delta(), Err(Error::OrderOverflow { .. })));
    }

    #[test]
    fn file_round_trip() {
        let f = f1_series(3, caps()).unwrap();
        let file = f.to_file();
        let json = serde_json::to_string(&file).unwrap();
        let back: SeriesFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_rational().unwrap(), f);
        let m = f.reduce(fp(3)).unwrap();
        assert_eq!(m.to_file().to_mod().unwrap(), m);
    }
}
