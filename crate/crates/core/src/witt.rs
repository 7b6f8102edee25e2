//! p-typical Witt vectors of finite length.
//!
//! Sum, product, negation, Frobenius and the comonad map are evaluated
//! through universal integer polynomials, obtained once per `(p, length)`
//! by inverting the ghost map over Q and cached.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jetspace::SchemePresentation;
use crate::padic::PadicElem;
use crate::poly::{JetVar, QPoly, Rationals};

/// The ring operations needed to evaluate universal polynomials.
pub trait WittRing: Clone + PartialEq + fmt::Debug {
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// The image of an integer, in the same ring as `self`.
    fn int_like(&self, n: &BigInt) -> Self;

    fn zero_like(&self) -> Self {
        self.int_like(&BigInt::zero())
    }

    fn one_like(&self) -> Self {
        self.int_like(&BigInt::one())
    }

    fn pow(&self, mut e: u64) -> Self {
        let mut result = self.one_like();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }
}

impl WittRing for BigInt {
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn int_like(&self, n: &BigInt) -> Self {
        n.clone()
    }
    fn pow(&self, e: u64) -> Self {
        num_traits::pow(self.clone(), e as usize)
    }
}

impl WittRing for PadicElem {
    fn add(&self, other: &Self) -> Self {
        PadicElem::add(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        PadicElem::mul(self, other)
    }
    fn neg(&self) -> Self {
        PadicElem::neg(self)
    }
    fn int_like(&self, n: &BigInt) -> Self {
        self.ctx().from_bigint(n)
    }
    fn pow(&self, e: u64) -> Self {
        PadicElem::pow(self, e)
    }
}

/// `(a_0, .., a_m)` in `W_m(R)`: length `m+1`.
#[derive(Clone, PartialEq)]
pub struct WittVector<R> {
    p: u64,
    comps: Vec<R>,
}

impl<R: fmt::Display> fmt::Display for WittVector<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.comps.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

impl<R: fmt::Debug> fmt::Debug for WittVector<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W{:?}", self.comps)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Kind {
    Add,
    Mul,
    Neg,
    Frobenius,
    /// Components `c_{j,k}` of the comonad map into `W_{m'}(W_{m''})`.
    Comonad(usize, usize),
}

type Cache = Mutex<HashMap<(u64, Kind, usize), Arc<Vec<QPoly>>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn a(i: usize) -> JetVar {
    JetVar::new(0, i as u32)
}

fn b(i: usize) -> JetVar {
    JetVar::new(1, i as u32)
}

fn qint(n: &BigInt) -> BigRational {
    BigRational::from_integer(n.clone())
}

fn p_pow(p: u64, k: usize) -> BigInt {
    num_traits::pow(BigInt::from(p), k)
}

/// Ghost polynomial `w_k = Σ_{j≤k} p^j X_j^{p^{k−j}}` in the variables `var(j)`.
fn ghost_poly(p: u64, k: usize, var: &dyn Fn(usize) -> JetVar) -> QPoly {
    let mut acc = QPoly::zero(Rationals);
    for j in 0..=k {
        let e = num_traits::pow(p, k - j) as u32;
        acc = acc.add(&QPoly::var(Rationals, var(j)).pow(e).scale(&qint(&p_pow(p, j))));
    }
    acc
}

/// Witt components whose ghost components are the given polynomials,
/// asserting that every division by a power of p is exact over Z.
fn ghost_solve(p: u64, targets: &[QPoly]) -> Result<Vec<QPoly>> {
    let mut out: Vec<QPoly> = Vec::with_capacity(targets.len());
    for (k, g) in targets.iter().enumerate() {
        let mut rest = g.clone();
        for (j, x) in out.iter().enumerate() {
            let e = num_traits::pow(p, k - j) as u32;
            rest = rest.sub(&x.pow(e).scale(&qint(&p_pow(p, j))));
        }
        let x = rest.scale(&BigRational::new(BigInt::one(), p_pow(p, k)));
        if x.terms().any(|(_, c)| !c.denom().is_one()) {
            return Err(Error::IntegralityFailure(format!(
                "Witt component {k} for p={p} has a non-integral coefficient"
            )));
        }
        out.push(x);
    }
    Ok(out)
}

fn derive(p: u64, kind: Kind, len: usize) -> Result<Vec<QPoly>> {
    let ga = |k: usize| ghost_poly(p, k, &a);
    let gb = |k: usize| ghost_poly(p, k, &b);
    match kind {
        Kind::Add => ghost_solve(p, &(0..len).map(|k| ga(k).add(&gb(k))).collect::<Vec<_>>()),
        Kind::Mul => ghost_solve(p, &(0..len).map(|k| ga(k).mul(&gb(k))).collect::<Vec<_>>()),
        Kind::Neg => ghost_solve(p, &(0..len).map(|k| ga(k).neg()).collect::<Vec<_>>()),
        // W of length len+1 to length len.
        Kind::Frobenius => ghost_solve(p, &(0..len).map(|k| ga(k + 1)).collect::<Vec<_>>()),
        Kind::Comonad(m1, m2) => {
            // The j-th outer component has inner ghost sequence ((F^k a)_j)_k.
            let mut out = Vec::with_capacity((m1 + 1) * (m2 + 1));
            let mut fk: Vec<Vec<QPoly>> = Vec::with_capacity(m2 + 1);
            for k in 0..=m2 {
                fk.push(ghost_solve(p, &(0..=m1).map(|i| ga(i + k)).collect::<Vec<_>>())?);
            }
            for j in 0..=m1 {
                let targets: Vec<QPoly> = (0..=m2).map(|k| fk[k][j].clone()).collect();
                out.extend(ghost_solve(p, &targets)?);
            }
            debug_assert_eq!(out.len(), len);
            Ok(out)
        }
    }
}

fn universal(p: u64, kind: Kind, len: usize) -> Result<Arc<Vec<QPoly>>> {
    if let Some(v) = cache().lock().unwrap().get(&(p, kind, len)) {
        return Ok(Arc::clone(v));
    }
    // Derived outside the lock; a concurrent duplicate derivation gives the same result.
    let polys = Arc::new(derive(p, kind, len)?);
    cache().lock().unwrap().entry((p, kind, len)).or_insert_with(|| Arc::clone(&polys));
    Ok(polys)
}

/// Evaluate an integer polynomial with `a_i ↦ x[i]`, `b_i ↦ y[i]`.
fn eval<R: WittRing>(f: &QPoly, x: &[R], y: &[R], template: &R) -> R {
    let mut powers: HashMap<(JetVar, u32), R> = HashMap::new();
    let mut acc = template.zero_like();
    for (m, c) in f.terms() {
        let mut t = template.int_like(c.numer());
        for &(v, e) in m.pairs() {
            let pw = powers
                .entry((v, e))
                .or_insert_with(|| {
                    let base = if v.base == 0 { &x[v.order as usize] } else { &y[v.order as usize] };
                    base.pow(e as u64)
                })
                .clone();
            t = t.mul(&pw);
        }
        acc = acc.add(&t);
    }
    acc
}

impl<R: WittRing> WittVector<R> {
    pub fn new(p: u64, comps: Vec<R>) -> Result<Self> {
        if comps.is_empty() {
            return Err(Error::InvalidArgument("a Witt vector needs at least one component".into()));
        }
        Ok(WittVector { p, comps })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Number of components `m+1`.
    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn components(&self) -> &[R] {
        &self.comps
    }

    pub fn zero(p: u64, len: usize, template: &R) -> Self {
        WittVector { p, comps: vec![template.zero_like(); len] }
    }

    pub fn one(p: u64, len: usize, template: &R) -> Self {
        let mut comps = vec![template.zero_like(); len];
        comps[0] = template.one_like();
        WittVector { p, comps }
    }

    /// Teichmüller representative `[r] = (r, 0, .., 0)`.
    pub fn teichmuller(p: u64, len: usize, r: &R) -> Self {
        let mut comps = vec![r.zero_like(); len];
        comps[0] = r.clone();
        WittVector { p, comps }
    }

    /// `v_i = (0, .., 0, 1, 0, .., 0)` with `i` leading zeroes.
    pub fn basis_v(p: u64, len: usize, i: usize, template: &R) -> Self {
        let mut comps = vec![template.zero_like(); len];
        comps[i] = template.one_like();
        WittVector { p, comps }
    }

    /// The image of an integer under `Z → W_m(R)`.
    pub fn from_int(p: u64, len: usize, n: &BigInt, template: &R) -> Self {
        let comps = int_components(p, len, n).iter().map(|c| template.int_like(c)).collect();
        WittVector { p, comps }
    }

    fn template(&self) -> &R {
        &self.comps[0]
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.comps.len() != other.comps.len() {
            return Err(Error::LengthMismatch(self.comps.len(), other.comps.len()));
        }
        if self.p != other.p {
            return Err(Error::ContextMismatch);
        }
        Ok(())
    }

    /// `w_k = Σ_{j≤k} p^j a_j^{p^{k−j}}`.
    pub fn ghost(&self) -> Vec<R> {
        let t = self.template();
        (0..self.len())
            .map(|k| {
                let mut acc = t.zero_like();
                for j in 0..=k {
                    let e = num_traits::pow(self.p, k - j);
                    acc = acc.add(&t.int_like(&p_pow(self.p, j)).mul(&self.comps[j].pow(e)));
                }
                acc
            })
            .collect()
    }

    fn apply(&self, kind: Kind, other: Option<&Self>) -> Result<Self> {
        let polys = universal(self.p, kind, self.len())?;
        let y: &[R] = other.map_or(&[], |o| &o.comps);
        let comps = polys.iter().map(|f| eval(f, &self.comps, y, self.template())).collect();
        Ok(WittVector { p: self.p, comps })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        self.apply(Kind::Add, Some(other))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        self.apply(Kind::Mul, Some(other))
    }

    pub fn neg(&self) -> Result<Self> {
        self.apply(Kind::Neg, None)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg()?)
    }

    /// Frobenius `F: W_m → W_{m−1}`, with `w_k(Fa) = w_{k+1}(a)`.
    pub fn frobenius(&self) -> Result<Self> {
        if self.len() < 2 {
            return Err(Error::InvalidArgument("Frobenius needs length at least 2".into()));
        }
        let polys = universal(self.p, Kind::Frobenius, self.len() - 1)?;
        let comps = polys.iter().map(|f| eval(f, &self.comps, &[], self.template())).collect();
        Ok(WittVector { p: self.p, comps })
    }

    /// Verschiebung `V: W_m → W_{m+1}`, `(a_0, ..) ↦ (0, a_0, ..)`.
    pub fn verschiebung(&self) -> Self {
        let mut comps = vec![self.template().zero_like()];
        comps.extend(self.comps.iter().cloned());
        WittVector { p: self.p, comps }
    }

    /// Keep the first `len` components (the restriction `W_m → W_{len−1}`).
    pub fn truncate(&self, len: usize) -> Self {
        WittVector { p: self.p, comps: self.comps[..len.min(self.len())].to_vec() }
    }

    /// The natural map `W_{m'+m''}(R) → W_{m'}(W_{m''}(R))`.
    pub fn comonad_map(&self, m1: usize, m2: usize) -> Result<WittVector<WittVector<R>>> {
        if m1 + m2 + 1 != self.len() {
            return Err(Error::LengthMismatch(m1 + m2 + 1, self.len()));
        }
        if m1 + m2 > MAX_COMONAD_LENGTH {
            return Err(Error::CapExceeded(format!("comonad map with m'+m'' = {} > {MAX_COMONAD_LENGTH}", m1 + m2)));
        }
        let polys = universal(self.p, Kind::Comonad(m1, m2), self.len() + m1 * m2)?;
        let vals: Vec<R> = polys.iter().map(|f| eval(f, &self.comps, &[], self.template())).collect();
        let outer = vals.chunks(m2 + 1).map(|c| WittVector { p: self.p, comps: c.to_vec() }).collect();
        Ok(WittVector { p: self.p, comps: outer })
    }
}

/// Bound on `m' + m''` for the comonad map.
pub const MAX_COMONAD_LENGTH: usize = 4;

impl<R: WittRing> WittRing for WittVector<R> {
    fn add(&self, other: &Self) -> Self {
        WittVector::add(self, other).expect("equal lengths")
    }
    fn mul(&self, other: &Self) -> Self {
        WittVector::mul(self, other).expect("equal lengths")
    }
    fn neg(&self) -> Self {
        WittVector::neg(self).expect("integral negation")
    }
    fn int_like(&self, n: &BigInt) -> Self {
        WittVector::from_int(self.p, self.len(), n, self.template())
    }
}

/// Components of the integer `n` in `W(Z)`.
fn int_components(p: u64, len: usize, n: &BigInt) -> Vec<BigInt> {
    let mut out: Vec<BigInt> = Vec::with_capacity(len);
    for k in 0..len {
        let mut rest = n.clone();
        for (j, x) in out.iter().enumerate() {
            rest -= p_pow(p, j) * num_traits::pow(x.clone(), num_traits::pow(p as usize, k - j));
        }
        let (q, r) = rest.div_rem(&p_pow(p, k));
        debug_assert!(r.is_zero());
        out.push(q);
    }
    out
}

/// Random Witt vector over Z with components in `[-bound, bound]`.
pub fn random_int_vector<G: Rng>(p: u64, len: usize, bound: i64, rng: &mut G) -> WittVector<BigInt> {
    WittVector { p, comps: (0..len).map(|_| BigInt::from(rng.gen_range(-bound..=bound))).collect() }
}

impl WittVector<PadicElem> {
    /// `a ↦ (a, δa)`, at one digit less than `a`.
    pub fn w1_of(a: &PadicElem) -> Result<Self> {
        let d = a.fermat_quotient()?;
        Ok(WittVector { p: a.p(), comps: vec![a.reduce_to(d.prec()), d] })
    }
}

/// Outcome of checking that `a ↦ (a, δa)` is a ring homomorphism into `W_1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct W1Report {
    pub pairs: usize,
    pub add_failures: usize,
    pub mul_failures: usize,
    pub identity_ok: bool,
}

impl W1Report {
    pub fn holds(&self) -> bool {
        self.add_failures == 0 && self.mul_failures == 0 && self.identity_ok
    }
}

/// Check `(a+b, δ(a+b)) = (a, δa) + (b, δb)` and the product analogue on all ordered pairs.
pub fn w1_hom_check(sample: &[PadicElem]) -> Result<W1Report> {
    let mut report = W1Report { pairs: 0, add_failures: 0, mul_failures: 0, identity_ok: true };
    if let Some(first) = sample.first() {
        let one = first.ctx().one();
        report.identity_ok = WittVector::w1_of(&one)? == WittVector::one(one.p(), 2, &one);
    }
    let images = sample.iter().map(WittVector::w1_of).collect::<Result<Vec<_>>>()?;
    for (x, wx) in sample.iter().zip(&images) {
        for (y, wy) in sample.iter().zip(&images) {
            report.pairs += 1;
            if WittVector::w1_of(&x.add(y))? != wx.add(wy)? {
                report.add_failures += 1;
            }
            if WittVector::w1_of(&x.mul(y))? != wx.mul(wy)? {
                report.mul_failures += 1;
            }
        }
    }
    Ok(report)
}

/// A presentation of `W_m(R)` on generators `v_1, .., v_m`.
#[derive(Clone, Debug)]
pub struct WittPresentation {
    pub p: u64,
    pub m: usize,
    pub scheme: SchemePresentation,
    /// Number of random vectors decomposed on the basis `1, v_1, .., v_m`.
    pub spanning_samples: usize,
}

/// `W_m(R) = R[v_1..v_m] / (v_i v_j − p^i v_j, i ≤ j)`, with the relations
/// checked exactly in `W_m(Z)` and the basis `1, v_1, .., v_m` checked on
/// random vectors via ghost components.
pub fn witt_presentation<G: Rng>(p: u64, m: usize, samples: usize, rng: &mut G) -> Result<WittPresentation> {
    if m > 3 {
        return Err(Error::CapExceeded(format!("presentation of W_{m} (at most W_3)")));
    }
    let names: Vec<String> = (1..=m).map(|i| format!("v{i}")).collect();
    let mut rels: Vec<String> = Vec::new();
    let len = m + 1;
    let z = BigInt::zero();
    for i in 1..=m {
        for j in i..=m {
            let vi = WittVector::basis_v(p, len, i, &z);
            let vj = WittVector::basis_v(p, len, j, &z);
            let lhs = vi.mul(&vj)?;
            let rhs = WittVector::from_int(p, len, &p_pow(p, i), &z).mul(&vj)?;
            if lhs != rhs {
                return Err(Error::PresentationUnverified(format!("v{i}*v{j} != p^{i}*v{j}")));
            }
            let lhs_text = if i == j { format!("v{i}^2") } else { format!("v{i}*v{j}") };
            rels.push(format!("{lhs_text} - {}*v{j}", p_pow(p, i)));
        }
    }
    for _ in 0..samples {
        let w = random_int_vector(p, len, 20, rng);
        let g = w.ghost();
        let mut coords = vec![g[0].clone()];
        for i in 1..len {
            let (q, r) = (&g[i] - &g[i - 1]).div_rem(&p_pow(p, i));
            if !r.is_zero() {
                return Err(Error::PresentationUnverified(format!("{w} is not in the span of 1, v_1, ..")));
            }
            coords.push(q);
        }
        let mut acc = WittVector::from_int(p, len, &coords[0], &z);
        for (i, c) in coords.iter().enumerate().skip(1) {
            let term = WittVector::from_int(p, len, c, &z).mul(&WittVector::basis_v(p, len, i, &z))?;
            acc = acc.add(&term)?;
        }
        if acc != w {
            return Err(Error::PresentationUnverified(format!("{w} does not decompose on 1, v_1, ..")));
        }
    }
    let rel_refs: Vec<&str> = rels.iter().map(|s| s.as_str()).collect();
    let scheme = SchemePresentation::new(p, &names, &rel_refs, &format!("W_{m}"))?;
    Ok(WittPresentation { p, m, scheme, spanning_samples: samples })
}

/// On-disk form: `{p, length, components}` with decimal components.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WittFile {
    pub p: u64,
    pub length: usize,
    pub components: Vec<String>,
}

impl WittVector<BigInt> {
    pub fn to_file(&self) -> WittFile {
        WittFile { p: self.p, length: self.len(), components: self.comps.iter().map(|c| c.to_string()).collect() }
    }

    pub fn from_file(f: &WittFile) -> Result<Self> {
        if f.components.len() != f.length {
            return Err(Error::LengthMismatch(f.length, f.components.len()));
        }
        Self::parse_components(f.p, &f.components)
    }

    fn parse_components<S: AsRef<str>>(p: u64, parts: &[S]) -> Result<Self> {
        let comps = parts
            .iter()
            .map(|s| {
                s.as_ref()
                    .trim()
                    .parse::<BigInt>()
                    .map_err(|_| Error::Parse { pos: 0, msg: format!("bad Witt component {:?}", s.as_ref()) })
            })
            .collect::<Result<Vec<_>>>()?;
        WittVector::new(p, comps)
    }

    /// Parse a bracketed list such as `[1, 0, 2]`.
    pub fn parse(p: u64, s: &str) -> Result<Self> {
        let t = s.trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or(Error::Parse { pos: 0, msg: "expected a bracketed component list".into() })?;
        let parts: Vec<&str> = inner.split(',').collect();
        Self::parse_components(p, &parts)
    }

    /// Reduce every component into `W(F_q)/p^N`.
    pub fn to_padic(&self, ctx: &Arc<crate::padic::PadicCtx>) -> WittVector<PadicElem> {
        WittVector { p: self.p, comps: self.comps.iter().map(|c| ctx.from_bigint(c)).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicCtx;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn wz(p: u64, v: &[i64]) -> WittVector<BigInt> {
        WittVector::new(p, v.iter().map(|&x| BigInt::from(x)).collect()).unwrap()
    }

    #[test]
    fn ghost_examples() {
        assert_eq!(wz(2, &[0, 1]).ghost(), vec![BigInt::from(0), BigInt::from(2)]);
        assert_eq!(wz(3, &[1, 0, 0]).ghost(), vec![BigInt::from(1); 3]);
        assert_eq!(wz(5, &[2, 3]).ghost(), vec![BigInt::from(2), BigInt::from(32 + 15)]);
    }

    #[test]
    fn length_two_sum_at_p2() {
        let polys = universal(2, Kind::Add, 2).unwrap();
        // a1 + b1 - a0*b0
        let expected = QPoly::var(Rationals, a(1))
            .add(&QPoly::var(Rationals, b(1)))
            .sub(&QPoly::var(Rationals, a(0)).mul(&QPoly::var(Rationals, b(0))));
        assert_eq!(polys[1], expected);
    }

    #[test]
    fn identities_and_ring_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for p in [2u64, 3] {
            for len in 1..=3 {
                let z = BigInt::zero();
                let zero = WittVector::zero(p, len, &z);
                let one = WittVector::one(p, len, &z);
                for _ in 0..20 {
                    let u = random_int_vector(p, len, 9, &mut rng);
                    let v = random_int_vector(p, len, 9, &mut rng);
                    let w = random_int_vector(p, len, 9, &mut rng);
                    assert_eq!(u.add(&zero).unwrap(), u);
                    assert_eq!(u.mul(&one).unwrap(), u);
                    assert!(u.add(&u.neg().unwrap()).unwrap() == zero);
                    assert_eq!(u.add(&v).unwrap().add(&w).unwrap(), u.add(&v.add(&w).unwrap()).unwrap());
                    assert_eq!(u.mul(&v).unwrap().mul(&w).unwrap(), u.mul(&v.mul(&w).unwrap()).unwrap());
                    let l = u.mul(&v.add(&w).unwrap()).unwrap();
                    let r = u.mul(&v).unwrap().add(&u.mul(&w).unwrap()).unwrap();
                    assert_eq!(l, r);
                    let gs: Vec<BigInt> = u.ghost().iter().zip(v.ghost()).map(|(x, y)| x + y).collect();
                    assert_eq!(u.add(&v).unwrap().ghost(), gs);
                    let gp: Vec<BigInt> = u.ghost().iter().zip(v.ghost()).map(|(x, y)| x * y).collect();
                    assert_eq!(u.mul(&v).unwrap().ghost(), gp);
                }
            }
        }
    }

    #[test]
    fn v_relations() {
        let z = BigInt::zero();
        for p in [2u64, 3] {
            let len = 4;
            for i in 1..len {
                for j in i..len {
                    let vi = WittVector::basis_v(p, len, i, &z);
                    let vj = WittVector::basis_v(p, len, j, &z);
                    let rhs = WittVector::from_int(p, len, &p_pow(p, i), &z).mul(&vj).unwrap();
                    assert_eq!(vi.mul(&vj).unwrap(), rhs);
                }
            }
        }
    }

    #[test]
    fn frobenius_after_verschiebung_is_p() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for p in [2u64, 3] {
            for len in 1..=3 {
                let u = random_int_vector(p, len, 9, &mut rng);
                let fv = u.verschiebung().frobenius().unwrap();
                let pu = WittVector::from_int(p, len, &BigInt::from(p), &BigInt::zero()).mul(&u).unwrap();
                assert_eq!(fv, pu);
                let ghost = u.verschiebung().frobenius().unwrap().ghost();
                let expected: Vec<BigInt> = u.ghost().iter().map(|g| g * p).collect();
                assert_eq!(ghost, expected);
            }
        }
    }

    #[test]
    fn frobenius_is_a_ring_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_int_vector(3, 3, 9, &mut rng);
        let v = random_int_vector(3, 3, 9, &mut rng);
        let l = u.mul(&v).unwrap().frobenius().unwrap();
        let r = u.frobenius().unwrap().mul(&v.frobenius().unwrap()).unwrap();
        assert_eq!(l, r);
    }

    #[test]
    fn comonad_map_trivial_and_identity() {
        let z = BigInt::zero();
        let w = wz(2, &[5]);
        let c = w.comonad_map(0, 0).unwrap();
        assert_eq!(c.components()[0].components(), &[BigInt::from(5)]);
        let one = WittVector::one(2, 3, &z);
        let c = one.comonad_map(1, 1).unwrap();
        let nested_one = WittVector::one(2, 2, &WittVector::one(2, 2, &z));
        assert_eq!(c, nested_one);
    }

    #[test]
    fn comonad_map_double_ghost_and_hom() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let u = random_int_vector(2, 3, 9, &mut rng);
            let v = random_int_vector(2, 3, 9, &mut rng);
            for (m1, m2) in [(1, 1), (2, 0), (0, 2)] {
                let cu = u.comonad_map(m1, m2).unwrap();
                let g = u.ghost();
                let outer = cu.ghost();
                for (i, inner) in outer.iter().enumerate() {
                    for (k, val) in inner.ghost().iter().enumerate() {
                        assert_eq!(val, &g[i + k]);
                    }
                }
                let cv = v.comonad_map(m1, m2).unwrap();
                assert_eq!(u.add(&v).unwrap().comonad_map(m1, m2).unwrap(), cu.add(&cv).unwrap());
                assert_eq!(u.mul(&v).unwrap().comonad_map(m1, m2).unwrap(), cu.mul(&cv).unwrap());
            }
        }
    }

    #[test]
    fn w1_map_is_a_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for p in [2u64, 3, 5] {
            let ctx = PadicCtx::new(p, 10).unwrap();
            let sample: Vec<PadicElem> = (0..8).map(|_| ctx.random(&mut rng)).collect();
            let r = w1_hom_check(&sample).unwrap();
            assert!(r.holds(), "{r:?}");
            let t = ctx.teichmuller_int(1 + p / 2);
            assert!(WittVector::w1_of(&t).unwrap().components()[1].is_zero());
        }
    }

    #[test]
    fn presentations() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let w1 = witt_presentation(3, 1, 20, &mut rng).unwrap();
        assert_eq!(w1.scheme.to_file().relations, vec!["v1^2 - 3*v1".to_string()]);
        let w0 = witt_presentation(3, 0, 5, &mut rng).unwrap();
        assert!(w0.scheme.relations().is_empty());
        let w2 = witt_presentation(2, 2, 20, &mut rng).unwrap();
        let rels = w2.scheme.to_file().relations;
        assert!(rels.contains(&"v1*v2 - 2*v2".to_string()), "{rels:?}");
        assert!(rels.contains(&"v2^2 - 4*v2".to_string()), "{rels:?}");
    }

    #[test]
    fn text_round_trip() {
        let w = WittVector::parse(2, "[1, -3, 0]").unwrap();
        assert_eq!(w, wz(2, &[1, -3, 0]));
        assert_eq!(WittVector::from_file(&w.to_file()).unwrap(), w);
        assert!(WittVector::parse(2, "1, 2").is_err());
    }
}
