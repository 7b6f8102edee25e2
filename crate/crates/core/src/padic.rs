//! Truncated p-adic integers with explicit precision.
//!
//! Elements live in `W(F_q) / p^N` where `q = p^m`; for `m = 1` this is just
//! `Z / p^N`. Each element carries the number of p-adic digits it is known
//! to, and every operation reports the precision that can actually be
//! derived from its operands.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};

/// Largest supported value of `p^N`; products of two residues must fit in `u128`.
const MAX_MODULUS: u128 = 1u128 << 62;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Shared parameters: the prime, the working precision and the unramified
/// extension (degree, defining polynomial, cached Frobenius lift).
#[derive(Debug)]
pub struct PadicCtx {
    p: u64,
    n: u32,
    m: u32,
    /// Lower coefficients `g_0..g_{m-1}` of the monic modulus, reduced mod `p^N`.
    modulus: Vec<u128>,
    /// `frob_powers[i]` is the Frobenius image of `t^i`, for `i < m`.
    frob_powers: Vec<Vec<u128>>,
    pows: Vec<u128>,
}

impl PartialEq for PadicCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.n == other.n && self.m == other.m && self.modulus == other.modulus
    }
}

impl Eq for PadicCtx {}

impl PadicCtx {
    /// `Z_p / p^N`.
    pub fn new(p: u64, n: u32) -> Result<Arc<Self>> {
        Self::with_extension(p, n, 1, None)
    }

    /// `W(F_{p^m}) / p^N`. When `modulus` is `None` the first monic polynomial
    /// of degree `m` that is irreducible mod p (in lexicographic order of
    /// coefficients) is used. `modulus` lists the lower coefficients
    /// `g_0, .., g_{m-1}` of the monic polynomial.
    pub fn with_extension(p: u64, n: u32, m: u32, modulus: Option<Vec<i64>>) -> Result<Arc<Self>> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("precision N must be at least 1".into()));
        }
        if m == 0 {
            return Err(Error::InvalidArgument("extension degree must be at least 1".into()));
        }
        let mut pows = vec![1u128];
        for _ in 0..n {
            let next = pows.last().unwrap() * p as u128;
            if next >= MAX_MODULUS {
                return Err(Error::CapExceeded(format!("p^N = {p}^{n} exceeds 2^62")));
            }
            pows.push(next);
        }
        let big = pows[n as usize];
        let modulus: Vec<u128> = if m == 1 {
            Vec::new()
        } else {
            let low = match modulus {
                Some(g) => {
                    if g.len() != m as usize {
                        return Err(Error::InvalidArgument(format!(
                            "extension modulus needs {m} lower coefficients, got {}",
                            g.len()
                        )));
                    }
                    g
                }
                None => find_irreducible(p, m).into_iter().map(|c| c as i64).collect(),
            };
            let residues: Vec<u64> = low.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect();
            if !is_irreducible_mod_p(p, &residues) {
                return Err(Error::InvalidArgument("extension modulus is not irreducible mod p".into()));
            }
            low.iter().map(|&c| (c as i128).rem_euclid(big as i128) as u128).collect()
        };
        let mut ctx = PadicCtx { p, n, m, modulus, frob_powers: Vec::new(), pows };
        ctx.frob_powers = ctx.compute_frobenius();
        Ok(Arc::new(ctx))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Working precision N.
    pub fn precision(&self) -> u32 {
        self.n
    }

    pub fn ext_degree(&self) -> u32 {
        self.m
    }

    /// Lower coefficients of the extension modulus (empty when m = 1).
    pub fn ext_modulus(&self) -> &[u128] {
        &self.modulus
    }

    /// Residue field size `q = p^m`.
    pub fn residue_field_size(&self) -> u64 {
        self.p.pow(self.m)
    }

    pub fn pow_p(&self, k: u32) -> u128 {
        self.pows[k as usize]
    }

    // ---- raw arithmetic on coefficient vectors mod p^k ----

    fn raw_add(&self, a: &[u128], b: &[u128], k: u32) -> Vec<u128> {
        let md = self.pows[k as usize];
        a.iter().zip(b).map(|(x, y)| (x + y) % md).collect()
    }

    fn raw_sub(&self, a: &[u128], b: &[u128], k: u32) -> Vec<u128> {
        let md = self.pows[k as usize];
        a.iter().zip(b).map(|(x, y)| (x % md + md - y % md) % md).collect()
    }

    fn raw_mul(&self, a: &[u128], b: &[u128], k: u32) -> Vec<u128> {
        let md = self.pows[k as usize];
        let m = self.m as usize;
        if m == 1 {
            return vec![(a[0] % md) * (b[0] % md) % md];
        }
        let mut prod = vec![0u128; 2 * m - 1];
        for (i, x) in a.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + (x % md) * (y % md)) % md;
            }
        }
        // t^m = -(g_0 + g_1 t + ... + g_{m-1} t^{m-1})
        for d in (m..2 * m - 1).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            prod[d] = 0;
            for i in 0..m {
                let sub = c * (self.modulus[i] % md) % md;
                let idx = d - m + i;
                prod[idx] = (prod[idx] + md - sub) % md;
            }
        }
        prod.truncate(m);
        prod
    }

    fn raw_pow(&self, a: &[u128], mut e: u128, k: u32) -> Vec<u128> {
        let mut result = self.raw_one();
        let mut base = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                result = self.raw_mul(&result, &base, k);
            }
            base = self.raw_mul(&base, &base, k);
            e >>= 1;
        }
        result
    }

    fn raw_one(&self) -> Vec<u128> {
        let mut v = vec![0u128; self.m as usize];
        v[0] = 1;
        v
    }

    fn raw_is_unit(&self, a: &[u128]) -> bool {
        a.iter().any(|c| c % self.p as u128 != 0)
    }

    /// Inverse of a unit mod p^k: residue inverse by `x^(q-2)` in F_q, then Newton.
    fn raw_inverse(&self, a: &[u128], k: u32) -> Option<Vec<u128>> {
        if !self.raw_is_unit(a) {
            return None;
        }
        let q = self.residue_field_size() as u128;
        let mut x = if self.m == 1 {
            let inv = mod_inverse(a[0] % self.p as u128, self.p as u128)?;
            vec![inv]
        } else {
            self.raw_pow(a, q - 2, 1)
        };
        let mut cur = 1u32;
        while cur < k {
            cur = (cur * 2).min(k);
            let md = self.pows[cur as usize];
            let ax = self.raw_mul(a, &x, cur);
            let two_minus: Vec<u128> = ax
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let base = if i == 0 { 2 % md } else { 0 };
                    (base + md - c % md) % md
                })
                .collect();
            x = self.raw_mul(&x, &two_minus, cur);
        }
        Some(x)
    }

    fn raw_frobenius(&self, a: &[u128], k: u32) -> Vec<u128> {
        if self.m == 1 {
            return a.to_vec();
        }
        let md = self.pows[k as usize];
        let mut out = vec![0u128; self.m as usize];
        for (i, c) in a.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            for (j, f) in self.frob_powers[i].iter().enumerate() {
                out[j] = (out[j] + (c % md) * (f % md)) % md;
            }
        }
        out
    }

    /// Hensel-lift the root of the modulus congruent to `t^p` mod p.
    fn compute_frobenius(&self) -> Vec<Vec<u128>> {
        let m = self.m as usize;
        if m == 1 {
            return vec![vec![1]];
        }
        let n = self.n;
        let mut t = vec![0u128; m];
        t[1 % m] = 1;
        let mut r = self.raw_pow(&t, self.p as u128, n);
        // Newton: r <- r - g(r) / g'(r); quadratic convergence, 2 log N steps suffice.
        let steps = 2 + (32 - n.leading_zeros());
        for _ in 0..steps {
            let (g_val, dg_val) = self.eval_modulus_and_derivative(&r, n);
            let inv = self.raw_inverse(&dg_val, n).expect("modulus is separable mod p, so g'(root) is a unit");
            let corr = self.raw_mul(&g_val, &inv, n);
            r = self.raw_sub(&r, &corr, n);
        }
        let mut powers = Vec::with_capacity(m);
        let mut cur = self.raw_one();
        for _ in 0..m {
            powers.push(cur.clone());
            cur = self.raw_mul(&cur, &r, n);
        }
        powers
    }

    fn eval_modulus_and_derivative(&self, r: &[u128], k: u32) -> (Vec<u128>, Vec<u128>) {
        let m = self.m as usize;
        let md = self.pows[k as usize];
        // g(X) = X^m + sum g_i X^i, evaluated by Horner.
        let mut coeffs: Vec<u128> = self.modulus.clone();
        coeffs.push(1);
        let mut val = vec![0u128; m];
        for c in coeffs.iter().rev() {
            val = self.raw_mul(&val, r, k);
            val[0] = (val[0] + c % md) % md;
        }
        let mut dval = vec![0u128; m];
        for (i, c) in coeffs.iter().enumerate().skip(1).rev() {
            dval = self.raw_mul(&dval, r, k);
            dval[0] = (dval[0] + (c % md) * (i as u128 % md)) % md;
        }
        (val, dval)
    }

    // ---- element constructors ----

    fn elem(self: &Arc<Self>, c: Vec<u128>, prec: u32) -> PadicElem {
        let md = self.pows[prec as usize];
        PadicElem { ctx: Arc::clone(self), c: c.into_iter().map(|x| x % md).collect(), prec }
    }

    pub fn zero(self: &Arc<Self>) -> PadicElem {
        self.elem(vec![0; self.m as usize], self.n)
    }

    pub fn one(self: &Arc<Self>) -> PadicElem {
        self.elem(self.raw_one(), self.n)
    }

    pub fn from_i64(self: &Arc<Self>, v: i64) -> PadicElem {
        self.from_bigint(&BigInt::from(v))
    }

    pub fn from_bigint(self: &Arc<Self>, v: &BigInt) -> PadicElem {
        let md = BigInt::from(self.pows[self.n as usize]);
        let r = v.mod_floor(&md).to_u128().unwrap();
        let mut c = vec![0u128; self.m as usize];
        c[0] = r;
        self.elem(c, self.n)
    }

    /// A p-integral rational at full precision.
    pub fn from_rational(self: &Arc<Self>, v: &BigRational) -> Result<PadicElem> {
        let num = self.from_bigint(v.numer());
        let den = self.from_bigint(v.denom());
        num.div(&den)
    }

    /// Element from coefficients on the power basis `1, t, .., t^{m-1}`.
    pub fn from_coeffs(self: &Arc<Self>, coeffs: &[i64]) -> Result<PadicElem> {
        if coeffs.len() > self.m as usize {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients given for extension degree {}",
                coeffs.len(),
                self.m
            )));
        }
        let big = self.pows[self.n as usize] as i128;
        let mut c = vec![0u128; self.m as usize];
        for (slot, &x) in c.iter_mut().zip(coeffs) {
            *slot = (x as i128).rem_euclid(big) as u128;
        }
        Ok(self.elem(c, self.n))
    }

    /// The extension generator `t` (equal to 1's slot shifted; only meaningful for m > 1).
    pub fn generator(self: &Arc<Self>) -> PadicElem {
        let mut c = vec![0u128; self.m as usize];
        c[1 % self.m as usize] = 1;
        self.elem(c, self.n)
    }

    /// Teichmüller representative of the residue class with coefficients
    /// `residue` (mod p) on the power basis.
    pub fn teichmuller(self: &Arc<Self>, residue: &[u64]) -> PadicElem {
        let mut c = vec![0u128; self.m as usize];
        for (slot, &r) in c.iter_mut().zip(residue) {
            *slot = (r % self.p) as u128;
        }
        let q = self.residue_field_size() as u128;
        let mut x = c;
        for _ in 0..self.n {
            x = self.raw_pow(&x, q, self.n);
        }
        self.elem(x, self.n)
    }

    pub fn teichmuller_int(self: &Arc<Self>, residue: u64) -> PadicElem {
        self.teichmuller(&[residue])
    }

    pub fn random<R: Rng>(self: &Arc<Self>, rng: &mut R) -> PadicElem {
        let md = self.pows[self.n as usize];
        let c = (0..self.m).map(|_| rng.gen_range(0..md)).collect();
        self.elem(c, self.n)
    }

    pub fn random_unit<R: Rng>(self: &Arc<Self>, rng: &mut R) -> PadicElem {
        loop {
            let x = self.random(rng);
            if x.is_unit() {
                return x;
            }
        }
    }
}

fn mod_inverse(a: u128, m: u128) -> Option<u128> {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u128)
}

// ---- polynomials over F_p, only for choosing and checking extension moduli ----

fn fp_poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    // b monic-normalised internally
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead_inv = mod_inverse(b[db] as u128, p as u128).unwrap() as u64;
    while r.len() > db && !r.is_empty() {
        let dr = r.len() - 1;
        let c = r[dr] * lead_inv % p;
        if c != 0 {
            for i in 0..=db {
                let idx = dr - db + i;
                r[idx] = (r[idx] + p - c * b[i] % p) % p;
            }
        }
        r.pop();
        while r.last() == Some(&0) {
            r.pop();
        }
    }
    r
}

fn fp_poly_mulmod(a: &[u64], b: &[u64], g: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    while prod.last() == Some(&0) {
        prod.pop();
    }
    fp_poly_rem(&prod, g, p)
}

fn fp_poly_gcd_is_one(a: &[u64], b: &[u64], p: u64) -> bool {
    let (mut x, mut y) = (a.to_vec(), b.to_vec());
    while y.last() == Some(&0) {
        y.pop();
    }
    while x.last() == Some(&0) {
        x.pop();
    }
    while !y.is_empty() {
        let r = fp_poly_rem(&x, &y, p);
        x = y;
        y = r;
    }
    x.len() == 1
}

/// Rabin-style test: a degree-m polynomial is irreducible iff it shares no
/// factor with `X^{p^i} - X` for `i <= m/2`.
fn is_irreducible_mod_p(p: u64, lower: &[u64]) -> bool {
    let m = lower.len();
    let mut g = lower.to_vec();
    g.push(1);
    if m == 1 {
        return true;
    }
    let x = vec![0u64, 1];
    let mut xp = x.clone();
    for _ in 1..=m / 2 {
        // xp <- xp^p mod g
        let mut acc = vec![1u64];
        for _ in 0..p {
            acc = fp_poly_mulmod(&acc, &xp, &g, p);
        }
        xp = acc;
        let mut diff = xp.clone();
        diff.resize(diff.len().max(2), 0);
        diff[1] = (diff[1] + p - 1) % p;
        while diff.last() == Some(&0) {
            diff.pop();
        }
        if diff.is_empty() || !fp_poly_gcd_is_one(&g, &diff, p) {
            return false;
        }
    }
    true
}

fn find_irreducible(p: u64, m: u32) -> Vec<u64> {
    let m = m as usize;
    let total = p.pow(m as u32);
    for idx in 0..total {
        let mut lower = Vec::with_capacity(m);
        let mut v = idx;
        for _ in 0..m {
            lower.push(v % p);
            v /= p;
        }
        if is_irreducible_mod_p(p, &lower) {
            return lower;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// An element of `W(F_q)/p^prec`.
#[derive(Clone)]
pub struct PadicElem {
    ctx: Arc<PadicCtx>,
    c: Vec<u128>,
    prec: u32,
}

impl fmt::Debug for PadicElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {}^{})", self, self.ctx.p, self.prec)
    }
}

impl fmt::Display for PadicElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ctx.m == 1 {
            write!(f, "{}", self.to_signed())
        } else {
            let parts: Vec<String> = self.signed_coeffs().iter().map(|c| c.to_string()).collect();
            write!(f, "[{}]", parts.join(", "))
        }
    }
}

/// Equality of representatives at the common precision.
impl PartialEq for PadicElem {
    fn eq(&self, other: &Self) -> bool {
        if *self.ctx != *other.ctx {
            return false;
        }
        let k = self.prec.min(other.prec);
        let md = self.ctx.pows[k as usize];
        self.c.iter().zip(&other.c).all(|(a, b)| a % md == b % md)
    }
}

impl PadicElem {
    pub fn ctx(&self) -> &Arc<PadicCtx> {
        &self.ctx
    }

    pub fn p(&self) -> u64 {
        self.ctx.p
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Coefficients on the power basis, in `[0, p^prec)`.
    pub fn coeffs(&self) -> &[u128] {
        &self.c
    }

    fn check_ctx(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.ctx, &other.ctx) || *self.ctx == *other.ctx,
            "p-adic operands from different contexts"
        );
    }

    pub fn same_ctx(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.ctx, &other.ctx) || *self.ctx == *other.ctx
    }

    /// Drop digits so that the element is known only mod `p^prec`.
    pub fn reduce_to(&self, prec: u32) -> PadicElem {
        let k = prec.min(self.prec);
        self.ctx.elem(self.c.clone(), k)
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    pub fn is_unit(&self) -> bool {
        self.prec >= 1 && self.ctx.raw_is_unit(&self.c)
    }

    /// p-adic valuation, or `None` when the element is zero at its precision.
    pub fn valuation(&self) -> Option<u32> {
        if self.is_zero() {
            return None;
        }
        let p = self.ctx.p as u128;
        self.c
            .iter()
            .filter(|&&x| x != 0)
            .map(|&x| {
                let mut v = 0;
                let mut y = x;
                while y % p == 0 {
                    y /= p;
                    v += 1;
                }
                v
            })
            .min()
    }

    /// Residue mod p on the power basis.
    pub fn residue(&self) -> Vec<u64> {
        self.c.iter().map(|&x| (x % self.ctx.p as u128) as u64).collect()
    }

    /// Balanced representative in `(-p^prec/2, p^prec/2]`; first coefficient only.
    pub fn to_signed(&self) -> i128 {
        self.signed_coeffs()[0]
    }

    pub fn signed_coeffs(&self) -> Vec<i128> {
        let md = self.ctx.pows[self.prec as usize];
        self.c.iter().map(|&x| if x > md / 2 { x as i128 - md as i128 } else { x as i128 }).collect()
    }

    pub fn to_bigint(&self) -> BigInt {
        BigInt::from(self.c[0])
    }

    pub fn add(&self, other: &Self) -> PadicElem {
        self.check_ctx(other);
        let k = self.prec.min(other.prec);
        self.ctx.elem(self.ctx.raw_add(&self.c, &other.c, k), k)
    }

    pub fn sub(&self, other: &Self) -> PadicElem {
        self.check_ctx(other);
        let k = self.prec.min(other.prec);
        self.ctx.elem(self.ctx.raw_sub(&self.c, &other.c, k), k)
    }

    pub fn neg(&self) -> PadicElem {
        self.ctx.zero().sub(self).reduce_to(self.prec)
    }

    /// Product; the result is known to `min(prec)` digits, or more when an
    /// operand has positive valuation (`v(a) + prec(b)` and symmetrically).
    pub fn mul(&self, other: &Self) -> PadicElem {
        self.check_ctx(other);
        let va = self.valuation().unwrap_or(self.prec);
        let vb = other.valuation().unwrap_or(other.prec);
        let k = (va + other.prec).min(vb + self.prec).min(self.ctx.n);
        self.ctx.elem(self.ctx.raw_mul(&self.c, &other.c, k), k)
    }

    pub fn mul_int(&self, k: i64) -> PadicElem {
        self.mul(&self.ctx.from_i64(k))
    }

    pub fn pow(&self, e: u64) -> PadicElem {
        if e == 0 {
            return self.ctx.one();
        }
        let mut result: Option<PadicElem> = None;
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.mul(&base),
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result.unwrap()
    }

    /// Inverse of a unit; precision is preserved.
    pub fn inverse(&self) -> Result<PadicElem> {
        let inv = self.ctx.raw_inverse(&self.c, self.prec).ok_or(Error::NotInvertible)?;
        Ok(self.ctx.elem(inv, self.prec))
    }

    /// Division by a unit.
    pub fn div(&self, other: &Self) -> Result<PadicElem> {
        Ok(self.mul(&other.inverse()?))
    }

    /// Exact division by p: consumes one digit.
    pub fn div_p(&self) -> Result<PadicElem> {
        if self.prec == 0 {
            return Err(Error::InsufficientPrecision { needed: 1, available: 0 });
        }
        let p = self.ctx.p as u128;
        if self.c.iter().any(|x| x % p != 0) {
            return Err(Error::NotDivisibleByP);
        }
        Ok(self.ctx.elem(self.c.iter().map(|x| x / p).collect(), self.prec - 1))
    }

    /// Multiplication by `p^k`; the product is known to `prec + k` digits (capped at N).
    pub fn mul_p_pow(&self, k: u32) -> PadicElem {
        let prec = (self.prec + k).min(self.ctx.n);
        let f = self.ctx.pows[k.min(self.ctx.n) as usize];
        self.ctx.elem(self.c.iter().map(|x| x * f).collect(), prec)
    }

    /// The Frobenius lift: identity on `Z_p`, the cached Witt-vector
    /// Frobenius on unramified extensions.
    pub fn frobenius(&self) -> PadicElem {
        self.ctx.elem(self.ctx.raw_frobenius(&self.c, self.prec), self.prec)
    }

    /// The p-derivation `(phi(a) - a^p) / p`, known to one digit fewer than `a`.
    pub fn fermat_quotient(&self) -> Result<PadicElem> {
        if self.prec < 2 {
            return Err(Error::InsufficientPrecision { needed: 2, available: self.prec });
        }
        let diff = self.frobenius().sub(&self.pow(self.ctx.p).reduce_to(self.prec));
        diff.div_p().map_err(|_| Error::InexactDivision)
    }

    /// Iterated p-derivations `(a, δa, .., δ^n a)`.
    pub fn jet(&self, n: u32) -> Result<Vec<PadicElem>> {
        if self.prec < n + 1 {
            return Err(Error::InsufficientPrecision { needed: n + 1, available: self.prec });
        }
        let mut out = vec![self.clone()];
        for _ in 0..n {
            let next = out.last().unwrap().fermat_quotient()?;
            out.push(next);
        }
        Ok(out)
    }

    /// Lift of the value to a rational integer (first coefficient).
    pub fn lift_u128(&self) -> u128 {
        self.c[0]
    }

    pub fn is_in_base_ring(&self) -> bool {
        self.c.iter().skip(1).all(|&x| x == 0)
    }
}

/// Reduce a rational to its p-adic valuation and unit part.
pub fn rational_valuation(x: &BigRational, p: u64) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let mut v = 0i64;
    let mut n = x.numer().abs();
    while (&n % &pb).is_zero() {
        n /= &pb;
        v += 1;
    }
    let mut d = x.denom().abs();
    while (&d % &pb).is_zero() {
        d /= &pb;
        v -= 1;
    }
    Some(v)
}

pub fn is_p_integral(x: &BigRational, p: u64) -> bool {
    rational_valuation(x, p).map_or(true, |v| v >= 0)
}

/// `1` as a rational, for call sites that build series.
pub fn rat_one() -> BigRational {
    BigRational::one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fermat_quotient_of_two_mod_five() {
        let ctx = PadicCtx::new(5, 10).unwrap();
        // (2 - 2^5) / 5 = -6 exactly
        let d = ctx.from_i64(2).fermat_quotient().unwrap();
        assert_eq!(d.prec(), 9);
        assert_eq!(d.to_signed(), -6);
        assert!(ctx.one().fermat_quotient().unwrap().is_zero());
    }

    #[test]
    fn fermat_quotient_needs_two_digits() {
        let ctx = PadicCtx::new(5, 1).unwrap();
        assert_eq!(ctx.from_i64(2).fermat_quotient(), Err(Error::InsufficientPrecision { needed: 2, available: 1 }));
    }

    #[test]
    fn teichmuller_brute_force() {
        let ctx = PadicCtx::new(5, 2).unwrap();
        // brute force: x ≡ 2 mod 5 with x^4 ≡ 1 mod 25
        let expected = (0..25u64).find(|x| x % 5 == 2 && x.pow(4) % 25 == 1).unwrap();
        assert_eq!(expected, 7);
        assert_eq!(ctx.teichmuller_int(2).lift_u128(), 7);
        assert!(ctx.teichmuller_int(0).is_zero());
        assert_eq!(ctx.teichmuller_int(1), ctx.one());
    }

    #[test]
    fn teichmuller_is_constant() {
        for &p in &[2u64, 3, 5, 7] {
            let ctx = PadicCtx::new(p, 8).unwrap();
            for c in 0..p {
                let w = ctx.teichmuller_int(c);
                assert_eq!(w.pow(p), w);
                assert!(w.fermat_quotient().unwrap().is_zero());
            }
        }
    }

    #[test]
    fn non_prime_rejected() {
        assert_eq!(PadicCtx::new(9, 3).unwrap_err(), Error::NotPrime(9));
    }

    #[test]
    fn extension_frobenius_is_lift_of_p_power() {
        let ctx = PadicCtx::with_extension(2, 10, 2, None).unwrap();
        let t = ctx.generator();
        let ft = t.frobenius();
        // φ(t) is a root of the modulus congruent to t^2 mod 2
        assert_eq!(ft.reduce_to(1), t.pow(2).reduce_to(1));
        let g = ctx.ext_modulus().to_vec();
        let mut val = ft.pow(2);
        val = val.add(&ft.mul(&ctx.from_i64(g[1] as i64)));
        val = val.add(&ctx.from_i64(g[0] as i64));
        assert!(val.is_zero());
        // t^{q} = t on the Teichmüller lift of the generator
        let w = ctx.teichmuller(&[0, 1]);
        assert_eq!(w.frobenius(), w.pow(2));
    }

    #[test]
    fn extension_frobenius_is_multiplicative() {
        let ctx = PadicCtx::with_extension(3, 8, 3, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a = ctx.random(&mut rng);
            let b = ctx.random(&mut rng);
            assert_eq!(a.mul(&b).frobenius(), a.frobenius().mul(&b.frobenius()));
            assert_eq!(a.add(&b).frobenius(), a.frobenius().add(&b.frobenius()));
        }
    }

    #[test]
    fn inverse_and_division() {
        let ctx = PadicCtx::with_extension(5, 6, 2, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let a = ctx.random_unit(&mut rng);
            assert_eq!(a.mul(&a.inverse().unwrap()), ctx.one());
        }
        assert_eq!(ctx.from_i64(5).inverse().unwrap_err(), Error::NotInvertible);
        assert_eq!(ctx.from_i64(3).div_p().unwrap_err(), Error::NotDivisibleByP);
        let ten = ctx.from_i64(10).div_p().unwrap();
        assert_eq!(ten.prec(), 5);
        assert_eq!(ten.to_signed(), 2);
    }

    #[test]
    fn product_precision_accounts_for_valuation() {
        let ctx = PadicCtx::new(3, 10).unwrap();
        let a = ctx.from_i64(9).reduce_to(4);
        let b = ctx.from_i64(3).reduce_to(4);
        let u = ctx.from_i64(2).reduce_to(4);
        assert_eq!(a.mul(&b).prec(), 5);
        assert_eq!(a.mul(&a).prec(), 6);
        assert_eq!(a.mul(&u).prec(), 4);
    }
}
