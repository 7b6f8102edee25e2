//! δ-characters of `G_m` and of elliptic curves.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::deltapoly::{eval_modpoly, JetVarSet};
use crate::error::{Error, Result};
use crate::groups::curve::{EllipticCurveData, PadicCurve, ProjPoint};
use crate::groups::formal::{compose, elliptic_log, q, FormalGroupData};
use crate::padic::{rational_valuation, PadicCtx, PadicElem};
use crate::poly::{CoeffRing, DegreeCap, JetVar, ModPoly, ModRing, Monomial, Poly, QPoly, Rationals};

/// Coordinates in which a character series is written.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coordinates {
    /// One variable `u = x'/x^p` on `G_m`.
    GmRatio,
    /// Formal-group jet coordinates `T, T', T''`.
    FormalJet,
}

/// A δ-character as a truncated series.
#[derive(Clone, Debug)]
pub struct DeltaCharacter {
    pub order: u32,
    pub p: u64,
    pub coords: Coordinates,
    /// Variable names for printing (`u`, or `T` with jets).
    pub vars: Arc<JetVarSet>,
    /// The series, exact, truncated at total degree `degree`.
    pub series: QPoly,
    pub degree: u32,
    /// Trace of Frobenius used (elliptic case).
    pub a_p: Option<i64>,
    /// `ψ(pS, T', T'')` mod `p^eval_prec` for evaluation at points.
    eval_series: Option<ModPoly>,
    eval_prec: u32,
}

fn u() -> JetVar {
    JetVar::new(0, 0)
}

/// `(−1)^(n−1) p^(n−1)/n`.
pub fn gm_coefficient(p: u64, n: u32) -> BigRational {
    let sign = if n % 2 == 1 { 1 } else { -1 };
    BigRational::new(BigInt::from(sign) * BigInt::from(p).pow(n - 1), BigInt::from(n))
}

fn vp(n: u64, p: u64) -> u32 {
    let mut v = 0;
    let mut n = n;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// The order-1 character of `G_m`: `Σ_{n=1}^{terms} (−1)^(n−1) p^(n−1)/n u^n`.
pub fn gm_delta_character(p: u64, terms: u32) -> Result<DeltaCharacter> {
    let vars = JetVarSet::new(&["u"], 0, p)?;
    let series =
        Poly::from_terms(Rationals, (1..=terms).map(|n| (Monomial::from_pairs(vec![(u(), n)]), gm_coefficient(p, n))));
    Ok(DeltaCharacter {
        order: 1,
        p,
        coords: Coordinates::GmRatio,
        vars,
        series,
        degree: terms,
        a_p: None,
        eval_series: None,
        eval_prec: 0,
    })
}

/// The order-2 character of an ordinary elliptic curve on its formal group:
/// `ψ = p^(−1) (ℓ(φ²T) − a_p ℓ(φT) + p ℓ(T))` with `φT = T^p + pT'` and
/// `φ²T = (φT)^p + p(T'^p + pT'')`, truncated at total degree `degree`.
/// `eval_prec` is the p-adic precision of the series used at points.
pub fn elliptic_delta_character(e: &EllipticCurveData, degree: u32, eval_prec: u32) -> Result<DeltaCharacter> {
    if !e.is_ordinary() {
        return Err(Error::NotOrdinary(e.p));
    }
    let p = e.p;
    let vars = JetVarSet::new(&["T"], 2, p)?;
    let cap = DegreeCap::total(degree);
    let (_, log) = elliptic_log(&e.a4, &e.a6, degree);
    let (phi1, phi2) = frobenius_images::<Rationals>(&Rationals, p, None);
    let l1 = compose(&log, u(), &phi1, &cap);
    let l2 = compose(&log, u(), &phi2, &cap);
    let psi = l2.sub(&l1.scale(&q(e.a_p))).add(&log.scale(&q(p as i64))).div_p_pow(p, 1);
    if let Some((m, c)) = psi.terms().find(|(_, c)| rational_valuation(c, p).map_or(false, |v| v < 0)) {
        return Err(Error::IntegralityFailure(format!("coefficient {c} of {}", crate::text::monomial_text(&vars, m))));
    }
    let eval_series = if eval_prec > 0 { Some(evaluation_series(e, eval_prec)?) } else { None };
    Ok(DeltaCharacter {
        order: 2,
        p,
        coords: Coordinates::FormalJet,
        vars,
        series: psi,
        degree,
        a_p: Some(e.a_p),
        eval_series,
        eval_prec,
    })
}

/// `φT = T^p + pT'` and `φ²T = (φT)^p + p(T'^p + pT'')` with `T` scaled by
/// `scale` (i.e. `T = scale·S`).
fn frobenius_images<R: CoeffRing>(ring: &R, p: u64, scale: Option<i64>) -> (Poly<R>, Poly<R>) {
    let pc = ring.from_i64(p as i64);
    let t = match scale {
        Some(s) => Poly::var(ring.clone(), JetVar::new(0, 0)).scale(&ring.from_i64(s)),
        None => Poly::var(ring.clone(), JetVar::new(0, 0)),
    };
    let t1 = Poly::var(ring.clone(), JetVar::new(0, 1));
    let t2 = Poly::var(ring.clone(), JetVar::new(0, 2));
    let phi1 = t.pow(p as u32).add(&t1.scale(&pc));
    let phi_t1 = t1.pow(p as u32).add(&t2.scale(&pc));
    let phi2 = phi1.pow(p as u32).add(&phi_t1.scale(&pc));
    (phi1, phi2)
}

/// `ψ(pS, T', T'')` modulo `p^k`: every term of ψ at a point of the formal
/// group (`T ∈ pZ_p`) has valuation at least its coefficient's valuation
/// plus its T-degree, so only finitely many terms survive mod `p^k`.
fn evaluation_series(e: &EllipticCurveData, k: u32) -> Result<ModPoly> {
    let p = e.p;
    // ℓ terms of degree n contribute with valuation ≥ n − v_p(n) − 1
    let n_max =
        (1..=(k as u64 + 64)).filter(|&n| n as i64 - (vp(n, p) as i64) < k as i64 + 1).max().unwrap_or(1) as u32;
    let extra = (1..=n_max as u64).map(|n| vp(n, p)).max().unwrap_or(0);
    let ring = ModRing::new(p, k + extra + 1);
    let (_, log) = elliptic_log(&e.a4, &e.a6, n_max);
    let scaled = log.scale(&q(p as i64).pow(extra as i32));
    let lmod = scaled.to_mod(ring).ok_or_else(|| Error::IntegralityFailure("logarithm is not p-integral".into()))?;
    let (phi1, phi2) = frobenius_images(&ring, p, Some(p as i64));
    let base = Poly::var(ring, JetVar::new(0, 0)).scale(&(p % ring.modulus));
    let c = |g: &ModPoly| compose_mod(&lmod, g);
    let ap = ring.from_i64(e.a_p);
    let total = c(&phi2).sub(&c(&phi1).scale(&ap)).add(&c(&base).scale(&(p % ring.modulus)));
    let mut out = total;
    for _ in 0..=extra {
        out = out
            .div_p()
            .ok_or_else(|| Error::IntegralityFailure("ψ has a non-integral term on the formal group".into()))?;
    }
    Ok(out.reduce(k))
}

fn compose_mod(f: &ModPoly, g: &ModPoly) -> ModPoly {
    let deg = f.degree().unwrap_or(0);
    let ring = *f.ring();
    let mut acc = Poly::zero(ring);
    for n in (0..=deg).rev() {
        acc = acc.mul(g);
        acc.add_term(Monomial::one(), f.coeff(&Monomial::from_pairs(vec![(JetVar::new(0, 0), n)])));
    }
    acc
}

impl DeltaCharacter {
    /// Text form of the truncated series.
    pub fn to_text(&self) -> String {
        format!("{} + O(deg > {})", crate::text::print_poly(&self.vars, &self.series), self.degree)
    }

    /// Coefficient of `u^n` (G_m) or of a monomial in `T, T', T''`.
    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.series.coeff(m)
    }

    /// Evaluate a `G_m` character at a unit α: `u = δα/α^p`.
    /// The result is exact at precision `α.prec − 1`, lowered further if the
    /// truncation drops terms of smaller valuation.
    pub fn eval_gm(&self, alpha: &PadicElem) -> Result<PadicElem> {
        if self.coords != Coordinates::GmRatio {
            return Err(Error::InvalidArgument("not a G_m character".into()));
        }
        if !alpha.is_unit() {
            return Err(Error::NotInvertible);
        }
        let ctx = alpha.ctx();
        let uval = alpha.fermat_quotient()?.div(&alpha.pow(self.p))?;
        let mut acc = ctx.zero();
        let mut pw = ctx.one();
        for n in 1..=self.degree {
            pw = pw.mul(&uval);
            let c = self.series.coeff(&Monomial::from_pairs(vec![(u(), n)]));
            acc = acc.add(&ctx.from_rational(&c)?.mul(&pw));
        }
        // first omitted term bounds the truncation error
        let tail = ((self.degree + 1)..(self.degree + 200)).map(|n| n - 1 - vp(n as u64, self.p)).min().unwrap();
        Ok(acc.reduce_to(acc.prec().min(tail)))
    }

    /// Evaluate an elliptic character at a jet `(T, δT, δ²T)` with `T ∈ pZ_p`.
    pub fn eval_jet(&self, jet: &[PadicElem]) -> Result<PadicElem> {
        let series = self
            .eval_series
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("character built without an evaluation series".into()))?;
        if jet.len() < 3 {
            return Err(Error::InvalidArgument("need (T, δT, δ²T)".into()));
        }
        let ctx = jet[0].ctx().clone();
        if jet[0].valuation().map_or(false, |v| v == 0) {
            return Err(Error::PNotInDomain("T is not divisible by p".into()));
        }
        let s = jet[0].div_p()?;
        let vals = [s, jet[1].clone(), jet[2].clone()];
        let v = eval_modpoly(series, &ctx, &|jv: JetVar| vals[jv.order as usize].clone());
        let prec = vals.iter().map(|x| x.prec()).min().unwrap().min(self.eval_prec);
        Ok(v.reduce_to(prec.min(v.prec())))
    }

    pub fn eval_precision(&self) -> u32 {
        self.eval_prec
    }
}

/// `ψ_*(P)` for a kernel point, or `ψ(mP)/m` after translating by `m`
/// (prime to p) into the kernel of reduction.
pub fn psi_star(psi: &DeltaCharacter, curve: &PadicCurve, pt: &ProjPoint, m: u64) -> Result<PadicElem> {
    let p = curve.ctx.p();
    let (target, divisor) = if curve.in_kernel_of_reduction(pt) || is_identity(pt) {
        (pt.clone(), 1)
    } else {
        if m % p == 0 {
            return Err(Error::PNotInDomain(format!("p divides the translation order {m}")));
        }
        let mp = curve.mul(pt, m);
        if !curve.in_kernel_of_reduction(&mp) && !is_identity(&mp) {
            return Err(Error::PNotInDomain(format!("{m}·P does not reduce to the identity")));
        }
        (mp, m)
    };
    if is_identity(&target) {
        return Ok(curve.ctx.zero());
    }
    let t = curve.formal_parameter(&target)?;
    let jet = t.jet(2)?;
    let v = psi.eval_jet(&jet)?;
    if divisor == 1 {
        Ok(v)
    } else {
        v.div(&curve.ctx.from_i64(divisor as i64))
    }
}

fn is_identity(pt: &ProjPoint) -> bool {
    pt.x.is_zero() && pt.z.is_zero() && pt.y.is_unit()
}

/// Closed form on Z_p points: `φ` acts trivially, so `ψ(P) = (1 − a_p + p)/p · ℓ(T)`.
pub fn psi_closed_form(e: &EllipticCurveData, t: &PadicElem) -> Result<PadicElem> {
    let p = e.p;
    let ctx = t.ctx();
    let s = t.div_p()?;
    let n_max = ctx.precision() + 8;
    let (_, log) = elliptic_log(&e.a4, &e.a6, n_max);
    let factor = q(1 - e.a_p + p as i64);
    let mut acc = ctx.zero();
    let mut pw = ctx.one();
    for n in 1..=n_max {
        pw = pw.mul(&s);
        // coefficient of S^n: factor · c_n · p^(n−1)
        let c =
            log.coeff(&Monomial::from_pairs(vec![(JetVar::new(0, 0), n)])) * &factor * q(p as i64).pow(n as i32 - 1);
        acc = acc.add(&ctx.from_rational(&c)?.mul(&pw));
    }
    Ok(acc.reduce_to(s.prec().min(acc.prec())))
}

/// The two sides of `p·dψ = (φ*² − a_p φ* + p)ω`, as the coefficient
/// functions of `dT, dT', dT''`, truncated at total degree `degree`.
pub struct DpsiIdentity {
    pub lhs: [QPoly; 3],
    pub rhs: [QPoly; 3],
    pub degree: u32,
}

impl DpsiIdentity {
    pub fn defect(&self) -> [QPoly; 3] {
        [0, 1, 2].map(|k| self.lhs[k].sub(&self.rhs[k]))
    }

    /// Smallest p-adic valuation among defect coefficients (`None` if zero).
    pub fn defect_valuation(&self, p: u64) -> Option<i64> {
        self.defect().iter().filter_map(|d| d.min_valuation(p)).min()
    }
}

/// Build both sides of the dψ identity. `psi` must be truncated at a degree
/// strictly above `degree`; ω is taken from the formal group directly.
pub fn dpsi_identity(psi: &DeltaCharacter, fg: &FormalGroupData, degree: u32) -> Result<DpsiIdentity> {
    if psi.degree <= degree {
        return Err(Error::TruncationOverflow(format!(
            "ψ known to degree {}, identity needs {}",
            psi.degree,
            degree + 1
        )));
    }
    if fg.degree < degree + 1 {
        return Err(Error::TruncationOverflow(format!(
            "ω known to degree {}, identity needs {}",
            fg.degree,
            degree + 1
        )));
    }
    let p = psi.p;
    let a_p = psi.a_p.ok_or_else(|| Error::InvalidArgument("not an elliptic character".into()))?;
    let cap = DegreeCap::total(degree);
    let jets = [JetVar::new(0, 0), JetVar::new(0, 1), JetVar::new(0, 2)];
    let pq = q(p as i64);
    let lhs = jets.map(|v| psi.series.derivative(v).scale(&pq).truncate(&cap));
    let (phi1, phi2) = frobenius_images::<Rationals>(&Rationals, p, None);
    let omega = fg.omega.clone();
    let w1 = compose(&omega, u(), &phi1, &cap);
    let w2 = compose(&omega, u(), &phi2, &cap);
    let rhs = jets.map(|v| {
        let mut r = w2.mul_capped(&phi2.derivative(v), Some(&cap));
        r = r.sub(&w1.mul_capped(&phi1.derivative(v), Some(&cap)).scale(&q(a_p)));
        if v.order == 0 {
            r = r.add(&omega.scale(&pq).truncate(&cap));
        }
        r
    });
    Ok(DpsiIdentity { lhs, rhs, degree })
}

/// Evaluate the G_m character series at α directly from the definition
/// `(1/p)·log(φ(α)/α^p)`, as an independent oracle.
pub fn gm_log_oracle(alpha: &PadicElem) -> Result<PadicElem> {
    let ctx: &Arc<PadicCtx> = alpha.ctx();
    let p = ctx.p();
    let ratio = alpha.frobenius().div(&alpha.pow(p))?;
    // ratio = 1 + p·u; (1/p)·log(1 + pu) = Σ (−1)^(n−1) p^(n−1) u^n / n
    let pu = ratio.sub(&ctx.one());
    let uval = pu.div_p()?;
    let mut acc = ctx.zero();
    let mut pw = ctx.one();
    let terms = ctx.precision() * 2 + 8;
    for n in 1..=terms {
        pw = pw.mul(&uval);
        acc = acc.add(&ctx.from_rational(&gm_coefficient(p, n))?.mul(&pw));
    }
    Ok(acc.reduce_to(uval.prec().min(acc.prec())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::curve::x011_short;

    #[test]
    fn gm_leading_terms() {
        let psi = gm_delta_character(5, 10).unwrap();
        let c = |n| psi.coefficient(&Monomial::from_pairs(vec![(u(), n)]));
        assert_eq!(c(1), q(1));
        assert_eq!(c(2), BigRational::new(BigInt::from(-5), BigInt::from(2)));
    }

    #[test]
    fn gm_character_kills_one() {
        let ctx = PadicCtx::new(5, 12).unwrap();
        let psi = gm_delta_character(5, 32).unwrap();
        assert!(psi.eval_gm(&ctx.one()).unwrap().is_zero());
    }

    #[test]
    fn elliptic_psi_is_integral_at_x011() {
        let (a4, a6) = x011_short();
        let e = EllipticCurveData::new(7, a4, a6).unwrap();
        let psi = elliptic_delta_character(&e, 10, 6).unwrap();
        assert!(psi.series.is_p_integral(7));
    }

    #[test]
    fn supersingular_rejected() {
        let e = EllipticCurveData::new(3, BigInt::from(1), BigInt::from(0)).unwrap();
        assert_eq!(elliptic_delta_character(&e, 8, 0).unwrap_err(), Error::NotOrdinary(3));
    }
}
