//! Sparse multivariate polynomials over a coefficient ring, keyed by
//! monomials in jet variables `x^(j)`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::padic::rational_valuation;

/// A jet variable: base variable index and jet order (`x`, `x'`, `x''`, ...).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct JetVar {
    pub base: u16,
    pub order: u16,
}

impl JetVar {
    pub fn new(base: usize, order: u32) -> Self {
        JetVar { base: base as u16, order: order as u16 }
    }

    pub fn prime(self) -> Self {
        JetVar { base: self.base, order: self.order + 1 }
    }
}

/// Product of powers of jet variables, sorted by variable, no zero exponents.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(Vec<(JetVar, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: JetVar) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn from_pairs(mut pairs: Vec<(JetVar, u32)>) -> Self {
        pairs.retain(|&(_, e)| e > 0);
        pairs.sort_by_key(|&(v, _)| v);
        let mut out: Vec<(JetVar, u32)> = Vec::with_capacity(pairs.len());
        for (v, e) in pairs {
            match out.last_mut() {
                Some((lv, le)) if *lv == v => *le += e,
                _ => out.push((v, e)),
            }
        }
        Monomial(out)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pairs(&self) -> &[(JetVar, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn weighted_degree(&self, cap: &DegreeCap) -> u32 {
        self.0.iter().map(|&(v, e)| cap.weight(v) * e).sum()
    }

    pub fn exponent(&self, v: JetVar) -> u32 {
        self.0.iter().find(|&&(w, _)| w == v).map_or(0, |&(_, e)| e)
    }

    pub fn max_order(&self) -> Option<u32> {
        self.0.iter().map(|&(v, _)| v.order as u32).max()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// Remove variable `v`, returning its exponent and the remaining monomial.
    pub fn split_off(&self, v: JetVar) -> (u32, Monomial) {
        let mut e = 0;
        let rest = self
            .0
            .iter()
            .filter(|&&(w, k)| {
                if w == v {
                    e = k;
                    false
                } else {
                    true
                }
            })
            .copied()
            .collect();
        (e, Monomial(rest))
    }
}

/// Graded lexicographic order: total degree first, then the exponent of the
/// smallest variable where the monomials differ.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let d = self.degree().cmp(&other.degree());
        if d != Ordering::Equal {
            return d;
        }
        let (a, b) = (&self.0, &other.0);
        let mut i = 0;
        loop {
            match (a.get(i), b.get(i)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some(&(va, ea)), Some(&(vb, eb))) => {
                    if va != vb {
                        // the monomial containing the smaller variable is larger
                        return if va < vb { Ordering::Greater } else { Ordering::Less };
                    }
                    if ea != eb {
                        return ea.cmp(&eb);
                    }
                }
            }
            i += 1;
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Drop every monomial whose weighted degree exceeds `max`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeCap {
    pub max: u32,
    /// Per-variable weights; variables not listed weigh 1.
    pub weights: Vec<(JetVar, u32)>,
}

impl DegreeCap {
    pub fn total(max: u32) -> Self {
        DegreeCap { max, weights: Vec::new() }
    }

    pub fn weight(&self, v: JetVar) -> u32 {
        self.weights.iter().find(|&&(w, _)| w == v).map_or(1, |&(_, k)| k)
    }

    pub fn admits(&self, m: &Monomial) -> bool {
        m.weighted_degree(self) <= self.max
    }
}

/// Coefficient ring operations. Elements carry no context; the ring value does.
pub trait CoeffRing: Clone + Debug + PartialEq {
    type Elem: Clone + Debug + PartialEq;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_bigint(&self, n: &BigInt) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;

    fn from_i64(&self, n: i64) -> Self::Elem {
        self.from_bigint(&BigInt::from(n))
    }

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }
}

/// The rationals. Coefficients of δ-polynomials live in `Z_(p)[1/p] = Q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Rationals;

impl CoeffRing for Rationals {
    type Elem = BigRational;
    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn from_bigint(&self, n: &BigInt) -> BigRational {
        BigRational::from_integer(n.clone())
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
}

/// `Z / p^k`, with residues in `[0, p^k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModRing {
    pub p: u64,
    pub k: u32,
    pub modulus: u64,
}

impl ModRing {
    pub fn new(p: u64, k: u32) -> Self {
        let modulus = (p as u128).pow(k);
        assert!(modulus < (1u128 << 62), "modulus p^k too large");
        ModRing { p, k, modulus: modulus as u64 }
    }

    /// Exact division by p of a residue divisible by p, landing in `Z/p^{k-1}`.
    pub fn div_p(&self, a: u64) -> Option<u64> {
        if a % self.p == 0 {
            Some(a / self.p)
        } else {
            None
        }
    }

    pub fn lower(&self) -> ModRing {
        ModRing::new(self.p, self.k - 1)
    }

    pub fn inverse(&self, a: u64) -> Option<u64> {
        let (mut old_r, mut r) = (a as i128, self.modulus as i128);
        let (mut old_s, mut s) = (1i128, 0i128);
        while r != 0 {
            let q = old_r / r;
            (old_r, r) = (r, old_r - q * r);
            (old_s, s) = (s, old_s - q * s);
        }
        if old_r != 1 {
            return None;
        }
        Some(old_s.rem_euclid(self.modulus as i128) as u64)
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut result = 1 % self.modulus;
        let mut base = a % self.modulus;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        result
    }

    /// Reduce a p-integral rational; `None` if p divides the denominator.
    pub fn from_rational(&self, x: &BigRational) -> Option<u64> {
        let den = x.denom().mod_floor(&BigInt::from(self.modulus)).to_u64()?;
        let inv = self.inverse(den)?;
        let num = self.from_bigint(x.numer());
        Some(self.mul(&num, &inv))
    }

    /// Balanced representative.
    pub fn signed(&self, a: u64) -> i64 {
        if a > self.modulus / 2 {
            a as i64 - self.modulus as i64
        } else {
            a as i64
        }
    }
}

impl CoeffRing for ModRing {
    type Elem = u64;
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.modulus
    }
    fn from_bigint(&self, n: &BigInt) -> u64 {
        n.mod_floor(&BigInt::from(self.modulus)).to_u64().unwrap()
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 + *b as u128) % self.modulus as u128) as u64
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.modulus as u128) as u64
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.modulus - a
        }
    }
}

/// A polynomial: finite map from monomials to nonzero coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<R: CoeffRing> {
    ring: R,
    terms: BTreeMap<Monomial, R::Elem>,
}

pub type QPoly = Poly<Rationals>;
pub type ModPoly = Poly<ModRing>;

impl<R: CoeffRing> Poly<R> {
    pub fn zero(ring: R) -> Self {
        Poly { ring, terms: BTreeMap::new() }
    }

    pub fn constant(ring: R, c: R::Elem) -> Self {
        let mut p = Poly::zero(ring);
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn one(ring: R) -> Self {
        let c = ring.one();
        Poly::constant(ring, c)
    }

    pub fn from_i64(ring: R, n: i64) -> Self {
        let c = ring.from_i64(n);
        Poly::constant(ring, c)
    }

    pub fn var(ring: R, v: JetVar) -> Self {
        let c = ring.one();
        let mut p = Poly::zero(ring);
        p.add_term(Monomial::var(v), c);
        p
    }

    pub fn monomial(ring: R, m: Monomial, c: R::Elem) -> Self {
        let mut p = Poly::zero(ring);
        p.add_term(m, c);
        p
    }

    pub fn from_terms(ring: R, terms: impl IntoIterator<Item = (Monomial, R::Elem)>) -> Self {
        let mut p = Poly::zero(ring);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn add_term(&mut self, m: Monomial, c: R::Elem) {
        if self.ring.is_zero(&c) {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let s = self.ring.add(existing, &c);
                if self.ring.is_zero(&s) {
                    self.terms.remove(&m);
                } else {
                    *existing = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &R::Elem)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> R::Elem {
        self.terms.get(m).cloned().unwrap_or_else(|| self.ring.zero())
    }

    pub fn constant_term(&self) -> R::Elem {
        self.coeff(&Monomial::one())
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    pub fn max_order(&self) -> Option<u32> {
        self.terms.keys().filter_map(|m| m.max_order()).max()
    }

    pub fn vars(&self) -> Vec<JetVar> {
        let mut v: Vec<JetVar> = self.terms.keys().flat_map(|m| m.pairs().iter().map(|&(v, _)| v)).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), self.ring.neg(c));
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| self.ring.neg(c))
    }

    pub fn scale(&self, c: &R::Elem) -> Self {
        let mut out = Poly::zero(self.ring.clone());
        for (m, a) in &self.terms {
            out.add_term(m.clone(), self.ring.mul(a, c));
        }
        out
    }

    pub fn map_coeffs(&self, f: impl Fn(&R::Elem) -> R::Elem) -> Self {
        let mut out = Poly::zero(self.ring.clone());
        for (m, a) in &self.terms {
            out.add_term(m.clone(), f(a));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_capped(other, None)
    }

    pub fn mul_capped(&self, other: &Self, cap: Option<&DegreeCap>) -> Self {
        let mut acc: HashMap<Monomial, R::Elem> = HashMap::with_capacity(self.len() * other.len() / 2 + 1);
        let other_terms: Vec<(&Monomial, &R::Elem, u32)> =
            other.terms.iter().map(|(m, c)| (m, c, cap.map_or(0, |k| m.weighted_degree(k)))).collect();
        for (ma, ca) in &self.terms {
            let da = cap.map_or(0, |k| ma.weighted_degree(k));
            for &(mb, cb, db) in &other_terms {
                if let Some(k) = cap {
                    if da + db > k.max {
                        continue;
                    }
                }
                let prod = self.ring.mul(ca, cb);
                let m = ma.mul(mb);
                match acc.get_mut(&m) {
                    Some(e) => *e = self.ring.add(e, &prod),
                    None => {
                        acc.insert(m, prod);
                    }
                }
            }
        }
        let mut out = Poly::zero(self.ring.clone());
        for (m, c) in acc {
            if !self.ring.is_zero(&c) {
                out.terms.insert(m, c);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        self.pow_capped(e, None)
    }

    pub fn pow_capped(&self, e: u32, cap: Option<&DegreeCap>) -> Self {
        let mut result = Poly::one(self.ring.clone());
        if let Some(k) = cap {
            result = result.truncate(k);
        }
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_capped(&base, cap);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_capped(&base, cap);
            }
        }
        result
    }

    pub fn truncate(&self, cap: &DegreeCap) -> Self {
        Poly {
            ring: self.ring.clone(),
            terms: self.terms.iter().filter(|(m, _)| cap.admits(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    pub fn filter_terms(&self, keep: impl Fn(&Monomial, &R::Elem) -> bool) -> Self {
        Poly {
            ring: self.ring.clone(),
            terms: self.terms.iter().filter(|(m, c)| keep(m, c)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Ring homomorphism fixing coefficients and sending each variable `v`
    /// to `images(v)` (or to itself when `None`).
    pub fn substitute(&self, images: &dyn Fn(JetVar) -> Option<Poly<R>>, cap: Option<&DegreeCap>) -> Self {
        let mut power_cache: HashMap<(JetVar, u32), Poly<R>> = HashMap::new();
        let mut image_cache: HashMap<JetVar, Poly<R>> = HashMap::new();
        let mut out = Poly::zero(self.ring.clone());
        for (m, c) in &self.terms {
            let mut term = Poly::constant(self.ring.clone(), c.clone());
            for &(v, e) in m.pairs() {
                let img = image_cache
                    .entry(v)
                    .or_insert_with(|| images(v).unwrap_or_else(|| Poly::var(self.ring.clone(), v)))
                    .clone();
                let pw = power_cache.entry((v, e)).or_insert_with(|| img.pow_capped(e, cap)).clone();
                term = term.mul_capped(&pw, cap);
                if term.is_zero() {
                    break;
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Partial derivative with respect to `v`.
    pub fn derivative(&self, v: JetVar) -> Self {
        let mut out = Poly::zero(self.ring.clone());
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(v);
            if e == 0 {
                continue;
            }
            let mut pairs = rest.pairs().to_vec();
            if e > 1 {
                pairs.push((v, e - 1));
            }
            let coeff = self.ring.mul(c, &self.ring.from_i64(e as i64));
            out.add_term(Monomial::from_pairs(pairs), coeff);
        }
        out
    }

    /// Evaluate in any target with a ring structure.
    pub fn eval_with<T: Clone>(
        &self,
        coeff: &dyn Fn(&R::Elem) -> T,
        value: &dyn Fn(JetVar) -> T,
        add: &dyn Fn(&T, &T) -> T,
        mul: &dyn Fn(&T, &T) -> T,
        zero: T,
    ) -> T {
        let mut cache: HashMap<(JetVar, u32), T> = HashMap::new();
        let mut acc = zero;
        for (m, c) in &self.terms {
            let mut t = coeff(c);
            for &(v, e) in m.pairs() {
                let pw = cache
                    .entry((v, e))
                    .or_insert_with(|| {
                        let base = value(v);
                        let mut r = base.clone();
                        for _ in 1..e {
                            r = mul(&r, &base);
                        }
                        r
                    })
                    .clone();
                t = mul(&t, &pw);
            }
            acc = add(&acc, &t);
        }
        acc
    }

    /// Rename / reindex variables (must be injective on the variables present).
    pub fn rename(&self, f: impl Fn(JetVar) -> JetVar) -> Self {
        let mut out = Poly::zero(self.ring.clone());
        for (m, c) in &self.terms {
            let pairs = m.pairs().iter().map(|&(v, e)| (f(v), e)).collect();
            out.add_term(Monomial::from_pairs(pairs), c.clone());
        }
        out
    }
}

impl QPoly {
    /// Smallest p-adic valuation of a coefficient (`None` for zero).
    pub fn min_valuation(&self, p: u64) -> Option<i64> {
        self.terms.values().filter_map(|c| rational_valuation(c, p)).min()
    }

    pub fn is_p_integral(&self, p: u64) -> bool {
        self.min_valuation(p).map_or(true, |v| v >= 0)
    }

    /// Reduce a p-integral polynomial modulo `p^k`.
    pub fn to_mod(&self, ring: ModRing) -> Option<ModPoly> {
        let mut out = Poly::zero(ring);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), ring.from_rational(c)?);
        }
        Some(out)
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self.scale(&BigRational::from_integer(BigInt::from(n)))
    }

    /// Division by p^k (exact over Q).
    pub fn div_p_pow(&self, p: u64, k: u32) -> Self {
        let f = BigRational::from_integer(BigInt::from(p).pow(k));
        self.map_coeffs(|c| c / &f)
    }

    /// Largest power of p dividing every coefficient, capped.
    pub fn content_valuation(&self, p: u64) -> Option<i64> {
        self.min_valuation(p)
    }
}

impl ModPoly {
    /// Lift residues to integers (balanced representatives when `balanced`).
    pub fn lift(&self, balanced: bool) -> QPoly {
        let mut out = Poly::zero(Rationals);
        for (m, &c) in &self.terms {
            let v = if balanced { self.ring.signed(c) } else { c as i64 };
            out.add_term(m.clone(), BigRational::from_integer(BigInt::from(v)));
        }
        out
    }

    /// Exact division by p, landing in `Z/p^{k-1}`. `None` if some
    /// coefficient is not divisible by p.
    pub fn div_p(&self) -> Option<ModPoly> {
        let lower = self.ring.lower();
        let mut out = Poly::zero(lower);
        for (m, &c) in &self.terms {
            out.add_term(m.clone(), self.ring.div_p(c)? % lower.modulus);
        }
        Some(out)
    }

    /// Reduce to a smaller modulus `p^k`.
    pub fn reduce(&self, k: u32) -> ModPoly {
        let ring = ModRing::new(self.ring.p, k);
        let mut out = Poly::zero(ring);
        for (m, &c) in &self.terms {
            out.add_term(m.clone(), c % ring.modulus);
        }
        out
    }
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn abs_rat(x: &BigRational) -> BigRational {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> JetVar {
        JetVar::new(0, 0)
    }
    fn y() -> JetVar {
        JetVar::new(1, 0)
    }

    #[test]
    fn graded_order() {
        let a = Monomial::from_pairs(vec![(x(), 2)]);
        let b = Monomial::from_pairs(vec![(x(), 1), (y(), 1)]);
        let c = Monomial::from_pairs(vec![(y(), 1)]);
        assert!(a > b);
        assert!(b > c);
        assert!(Monomial::var(x()) > c);
    }

    #[test]
    fn binomial_expansion() {
        let r = Rationals;
        let s = Poly::var(r, x()).add(&Poly::var(r, y()));
        let cube = s.pow(3);
        assert_eq!(cube.len(), 4);
        assert_eq!(cube.coeff(&Monomial::from_pairs(vec![(x(), 2), (y(), 1)])), rat(3));
    }

    #[test]
    fn capped_product_drops_high_degree() {
        let r = ModRing::new(5, 3);
        let s = Poly::var(r, x()).add(&Poly::one(r));
        let cap = DegreeCap::total(2);
        let sq = s.pow_capped(4, Some(&cap));
        assert_eq!(sq.degree(), Some(2));
        assert_eq!(sq.coeff(&Monomial::from_pairs(vec![(x(), 2)])), 6);
    }

    #[test]
    fn derivative_and_substitution() {
        let r = Rationals;
        let f = Poly::var(r, x()).pow(3).add(&Poly::var(r, y()));
        let df = f.derivative(x());
        assert_eq!(df, Poly::var(r, x()).pow(2).scale_int(3));
        let g = f.substitute(
            &|v| {
                if v == x() {
                    Some(Poly::from_i64(r, 2))
                } else {
                    None
                }
            },
            None,
        );
        assert_eq!(g, Poly::var(r, y()).add(&Poly::from_i64(r, 8)));
    }
}
