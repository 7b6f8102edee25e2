//! Short Weierstrass curves over `Z`: point counting and projective
//! point arithmetic over `Z/p^N`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{PadicCtx, PadicElem};

/// `y² = x³ + a4 x + a6` with integer coefficients, at a prime p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EllipticCurveData {
    pub p: u64,
    pub a4: BigInt,
    pub a6: BigInt,
    /// Trace of Frobenius of the reduction.
    pub a_p: i64,
}

/// Curve input file: `{p, N, a4, a6, a_p?, newform?}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveFile {
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub p: Option<u64>,
    #[serde(rename = "N", default)]
    pub n: Option<u32>,
    pub a4: String,
    pub a6: String,
    #[serde(default)]
    pub a_p: Option<i64>,
    /// Newform coefficients `a_1, ..., a_K`.
    #[serde(default)]
    pub newform: Option<Vec<i64>>,
    #[serde(default)]
    pub level: Option<u64>,
}

impl CurveFile {
    pub fn coefficients(&self) -> Result<(BigInt, BigInt)> {
        let parse = |s: &str, what: &str| {
            s.trim()
                .parse::<BigInt>()
                .map_err(|_| Error::Parse { pos: 0, msg: format!("{what} is not an integer: {s:?}") })
        };
        Ok((parse(&self.a4, "a4")?, parse(&self.a6, "a6")?))
    }
}

fn mod_u64(a: &BigInt, p: u64) -> u64 {
    a.mod_floor(&BigInt::from(p)).to_u64().unwrap()
}

/// Legendre symbol `(a/p)` for odd p, `a` reduced.
pub fn legendre(a: u64, p: u64) -> i64 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    let r = crate::poly::ModRing::new(p, 1).pow(a, (p - 1) / 2);
    if r == 1 {
        1
    } else {
        -1
    }
}

/// `4a4³ + 27a6² mod p`.
pub fn discriminant_mod(a4: &BigInt, a6: &BigInt, p: u64) -> u64 {
    let d: BigInt = BigInt::from(4) * a4 * a4 * a4 + BigInt::from(27) * a6 * a6;
    mod_u64(&d, p)
}

/// Number of points of the reduction, including the point at infinity.
pub fn count_points(a4: &BigInt, a6: &BigInt, p: u64) -> Result<u64> {
    if p == 2 || discriminant_mod(a4, a6, p) == 0 {
        return Err(Error::BadReduction(p));
    }
    let (b4, b6) = (mod_u64(a4, p), mod_u64(a6, p));
    let mut count: i64 = 1;
    for x in 0..p {
        let rhs =
            ((x as u128 * x as u128 % p as u128 * x as u128 + b4 as u128 * x as u128 + b6 as u128) % p as u128) as u64;
        count += 1 + legendre(rhs, p);
    }
    Ok(count as u64)
}

/// `a_p = p + 1 − #E(F_p)` by exhaustive enumeration.
pub fn count_points_ap(a4: &BigInt, a6: &BigInt, p: u64) -> Result<i64> {
    Ok(p as i64 + 1 - count_points(a4, a6, p)? as i64)
}

impl EllipticCurveData {
    /// Curve with `a_p` obtained by point counting.
    pub fn new(p: u64, a4: BigInt, a6: BigInt) -> Result<Self> {
        let a_p = count_points_ap(&a4, &a6, p)?;
        Ok(EllipticCurveData { p, a4, a6, a_p })
    }

    /// Curve with a user-supplied `a_p` (still checked for good reduction).
    pub fn with_ap(p: u64, a4: BigInt, a6: BigInt, a_p: i64) -> Result<Self> {
        if p == 2 || discriminant_mod(&a4, &a6, p) == 0 {
            return Err(Error::BadReduction(p));
        }
        Ok(EllipticCurveData { p, a4, a6, a_p })
    }

    pub fn is_ordinary(&self) -> bool {
        self.a_p.rem_euclid(self.p as i64) != 0
    }

    pub fn hasse_ok(&self) -> bool {
        (self.a_p * self.a_p) as u64 <= 4 * self.p
    }

    pub fn num_points_mod_p(&self) -> u64 {
        (self.p as i64 + 1 - self.a_p) as u64
    }
}

/// The X₀(11) curve `y² + y = x³ − x² − 10x − 20` in short form
/// `y² = x³ − 27c4 x − 54c6`.
pub fn x011_short() -> (BigInt, BigInt) {
    let (c4, c6) = (BigInt::from(496), BigInt::from(20008));
    (BigInt::from(-27) * c4, BigInt::from(-54) * c6)
}

/// Projective point `(X : Y : Z)` on `Y²Z = X³ + a4 X Z² + a6 Z³` over `Z/p^N`.
#[derive(Clone, Debug)]
pub struct ProjPoint {
    pub x: PadicElem,
    pub y: PadicElem,
    pub z: PadicElem,
}

/// The curve over `Z/p^N` for point arithmetic.
#[derive(Clone, Debug)]
pub struct PadicCurve {
    pub ctx: Arc<PadicCtx>,
    pub a: PadicElem,
    pub b: PadicElem,
    b3: PadicElem,
}

impl PadicCurve {
    pub fn new(ctx: &Arc<PadicCtx>, a4: &BigInt, a6: &BigInt) -> Self {
        let a = ctx.from_bigint(a4);
        let b = ctx.from_bigint(a6);
        let b3 = b.mul_int(3);
        PadicCurve { ctx: ctx.clone(), a, b, b3 }
    }

    pub fn identity(&self) -> ProjPoint {
        ProjPoint { x: self.ctx.zero(), y: self.ctx.one(), z: self.ctx.zero() }
    }

    pub fn affine(&self, x: PadicElem, y: PadicElem) -> ProjPoint {
        ProjPoint { x, y, z: self.ctx.one() }
    }

    /// `Y²Z − X³ − aXZ² − bZ³`.
    pub fn equation(&self, pt: &ProjPoint) -> PadicElem {
        let (x, y, z) = (&pt.x, &pt.y, &pt.z);
        let z2 = z.mul(z);
        y.mul(y).mul(z).sub(&x.mul(x).mul(x)).sub(&self.a.mul(x).mul(&z2)).sub(&self.b.mul(&z2).mul(z))
    }

    /// Complete projective addition (valid for all inputs, including doubling).
    pub fn add(&self, p1: &ProjPoint, p2: &ProjPoint) -> ProjPoint {
        let (x1, y1, z1) = (&p1.x, &p1.y, &p1.z);
        let (x2, y2, z2) = (&p2.x, &p2.y, &p2.z);
        let a = &self.a;
        let b3 = &self.b3;
        let mut t0 = x1.mul(x2);
        let mut t1 = y1.mul(y2);
        let mut t2 = z1.mul(z2);
        let mut t3 = x1.add(y1);
        let mut t4 = x2.add(y2);
        t3 = t3.mul(&t4);
        t4 = t0.add(&t1);
        t3 = t3.sub(&t4);
        t4 = x1.add(z1);
        let mut t5 = x2.add(z2);
        t4 = t4.mul(&t5);
        t5 = t0.add(&t2);
        t4 = t4.sub(&t5);
        t5 = y1.add(z1);
        let mut x3 = y2.add(z2);
        t5 = t5.mul(&x3);
        x3 = t1.add(&t2);
        t5 = t5.sub(&x3);
        let mut z3 = a.mul(&t4);
        x3 = b3.mul(&t2);
        z3 = x3.add(&z3);
        x3 = t1.sub(&z3);
        z3 = t1.add(&z3);
        let mut y3 = x3.mul(&z3);
        t1 = t0.add(&t0);
        t1 = t1.add(&t0);
        t2 = a.mul(&t2);
        t4 = b3.mul(&t4);
        t1 = t1.add(&t2);
        t2 = t0.sub(&t2);
        t2 = a.mul(&t2);
        t4 = t4.add(&t2);
        t0 = t1.mul(&t4);
        y3 = y3.add(&t0);
        t0 = t5.mul(&t4);
        x3 = t3.mul(&x3);
        x3 = x3.sub(&t0);
        t0 = t3.mul(&t1);
        z3 = t5.mul(&z3);
        z3 = z3.add(&t0);
        ProjPoint { x: x3, y: y3, z: z3 }
    }

    pub fn neg(&self, pt: &ProjPoint) -> ProjPoint {
        ProjPoint { x: pt.x.clone(), y: pt.y.neg(), z: pt.z.clone() }
    }

    pub fn mul(&self, pt: &ProjPoint, k: u64) -> ProjPoint {
        let mut acc = self.identity();
        let mut base = pt.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            base = self.add(&base, &base);
            k >>= 1;
        }
        acc
    }

    /// Does the point reduce to the identity `(0 : 1 : 0)` mod p?
    pub fn in_kernel_of_reduction(&self, pt: &ProjPoint) -> bool {
        pt.y.is_unit() && !pt.x.is_unit() && !pt.z.is_unit()
    }

    /// Formal-group parameter `T = −X/Y` of a kernel point.
    pub fn formal_parameter(&self, pt: &ProjPoint) -> Result<PadicElem> {
        if !self.in_kernel_of_reduction(pt) {
            return Err(Error::PNotInDomain("point does not reduce to the identity".into()));
        }
        pt.x.neg().div(&pt.y)
    }

    /// A random point with affine coordinates in `Z_p`, by Hensel lifting a
    /// square root of `x³ + a x + b` for random `x`.
    pub fn random_affine_point<R: Rng>(&self, rng: &mut R) -> ProjPoint {
        let p = self.ctx.p();
        loop {
            let x = self.ctx.random(rng);
            let rhs = x.mul(&x).mul(&x).add(&self.a.mul(&x)).add(&self.b);
            if !rhs.is_unit() || legendre(rhs.residue()[0], p) != 1 {
                continue;
            }
            if let Some(y) = sqrt_unit(&rhs) {
                return self.affine(x, y);
            }
        }
    }

    /// A random point in the kernel of reduction, as `m·P` for a random
    /// affine point P and `m = #E(F_p)`.
    pub fn random_kernel_point<R: Rng>(&self, m: u64, rng: &mut R) -> Result<ProjPoint> {
        if m % self.ctx.p() == 0 {
            return Err(Error::PNotInDomain(format!("p divides the translation order {m}")));
        }
        loop {
            let pt = self.random_affine_point(rng);
            let k = self.mul(&pt, m);
            if self.in_kernel_of_reduction(&k) {
                return Ok(k);
            }
        }
    }
}

/// Square root of a unit square in `Z_p` (p odd) by Newton iteration.
pub fn sqrt_unit(a: &PadicElem) -> Option<PadicElem> {
    let ctx = a.ctx();
    let p = ctx.p();
    let r = a.residue()[0];
    let root0 = (1..p).find(|&s| s * s % p == r)?;
    let mut y = ctx.from_i64(root0 as i64);
    let two = ctx.from_i64(2);
    for _ in 0..(64 - (ctx.precision() as u64).leading_zeros() + 1) {
        // y ← y − (y² − a)/(2y)
        let f = y.mul(&y).sub(a);
        let step = f.div(&two.mul(&y)).ok()?;
        y = y.sub(&step);
    }
    if y.mul(&y).sub(a).is_zero() {
        Some(y)
    } else {
        None
    }
}
