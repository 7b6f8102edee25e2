//! Weight-2 newforms, the modular parametrization of their curve, and the
//! δ-Fourier expansion of the order-2 form `f♯` attached to them.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{DeltaSeries, JetExp, ModSeries, QSeries, SeriesCaps, SeriesRing};
use crate::error::{Error, Result};
use crate::groups::curve::{CurveFile, EllipticCurveData};
use crate::groups::formal::{elliptic_log, weierstrass_w};
use crate::padic::rational_valuation;
use crate::poly::{CoeffRing, JetVar, ModRing, Monomial, QPoly, Rationals};

/// q-expansion coefficients `a_1, .., a_K` of a weight-2 newform.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewformData {
    pub level: u64,
    pub weight: u32,
    pub coefficients: Vec<i64>,
    /// Where the curve and form come from (a label or file name).
    pub source: String,
}

impl NewformData {
    pub fn new(level: u64, coefficients: Vec<i64>, source: &str) -> Result<Self> {
        if coefficients.first() != Some(&1) {
            return Err(Error::InvalidArgument("a newform is normalized with a_1 = 1".into()));
        }
        Ok(NewformData { level, weight: 2, coefficients, source: source.to_string() })
    }

    /// `a_n` for `1 ≤ n ≤ K`.
    pub fn a(&self, n: usize) -> Option<i64> {
        if n == 0 {
            None
        } else {
            self.coefficients.get(n - 1).copied()
        }
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// `a_{mn} = a_m a_n` for coprime `m, n` with `mn ≤ K`.
    pub fn multiplicativity_ok(&self) -> bool {
        let k = self.len();
        (2..=k).all(|m| {
            (2..=k / m).all(|n| m.gcd(&n) != 1 || self.a(m * n) == Some(self.a(m).unwrap() * self.a(n).unwrap()))
        })
    }

    /// `|a_ℓ| ≤ 2√ℓ` at primes `ℓ ≤ K` of good reduction.
    pub fn hasse_ok(&self) -> bool {
        (2..=self.len() as u64).filter(|&l| crate::padic::is_prime(l) && self.level % l != 0).all(|l| {
            let a = self.a(l as usize).unwrap();
            (a * a) as u64 <= 4 * l
        })
    }

    /// The newform stored in a curve file, if any.
    pub fn from_curve_file(file: &CurveFile) -> Result<Option<Self>> {
        match &file.newform {
            None => Ok(None),
            Some(c) => {
                let level = file.level.or(file.n.map(u64::from)).unwrap_or(0);
                Ok(Some(Self::new(level, c.clone(), &file.label)?))
            }
        }
    }
}

/// `q ∏ (1 − q^n)² (1 − q^{11n})²` to `K` coefficients.
pub fn x011_newform(k: usize) -> NewformData {
    // coefficients of ∏(1 − q^n)²(1 − q^{11n})² up to q^{k−1}
    let mut c = vec![0i64; k];
    c[0] = 1;
    let mut mul_factor = |step: usize| {
        for _ in 0..2 {
            for i in (step..k).rev() {
                c[i] -= c[i - step];
            }
        }
    };
    for n in 1..k {
        mul_factor(n);
        if 11 * n < k {
            mul_factor(11 * n);
        }
    }
    NewformData { level: 11, weight: 2, coefficients: c, source: "X0(11)".into() }
}

/// The modular parametrization as q-series: `z = Σ (a_n/n) q^n`, the formal
/// parameter `t` with `ℓ(t) = z`, and the Weierstrass coordinates.
#[derive(Clone, Debug)]
pub struct Parametrization {
    pub z: QSeries,
    pub t: QSeries,
    pub x: QSeries,
    pub y: QSeries,
}

fn coeff_vec(f: &QPoly, len: usize) -> Vec<BigRational> {
    (0..len).map(|n| f.coeff(&Monomial::from_pairs(vec![(JetVar::new(0, 0), n as u32)]))).collect()
}

const PARAM_SLACK: i64 = 8;

/// `t(q) = ℓ^{-1}(Σ (a_n/n) q^n)`, then `x = t/w(t)`, `y = −1/w(t)` and
/// `t = −x/y` recomputed from them, all to q-degree `q_degree`.
pub fn modular_parametrization(e: &EllipticCurveData, f: &NewformData, q_degree: i64) -> Result<Parametrization> {
    let target = q_degree.max(1);
    // the poles of x and y cost precision on the way back to t
    let m = target + PARAM_SLACK;
    if (f.len() as i64) < m {
        return Err(Error::TruncationOverflow(format!("need {m} newform coefficients, have {}", f.len())));
    }
    let p = e.p;
    // slack for the poles of x and y
    let inner = SeriesCaps { q_degree: m + 12, jet_degree: 0, order: 0 };
    let z = QSeries::from_terms(
        p,
        Rationals,
        inner,
        Some(m),
        (1..=m).map(|n| (n, JetExp::one(), BigRational::new(BigInt::from(f.a(n as usize).unwrap()), BigInt::from(n)))),
    )?;
    let (_, log) = elliptic_log(&e.a4, &e.a6, m as u32 + 1);
    let l = coeff_vec(&log, m as usize + 2);
    let mut t = z.clone();
    for _ in 0..=m {
        let next = t.sub(&QSeries::compose(&l, &t)?.sub(&z)?)?;
        if next == t {
            break;
        }
        t = next;
    }
    for (a, _, c) in t.terms() {
        if rational_valuation(c, p).map_or(false, |v| v < 0) {
            return Err(Error::NonIntegralParametrization(format!("coefficient of q^{a} in t(q) is {c}")));
        }
    }
    let w_poly = weierstrass_w(&e.a4, &e.a6, m as u32 + 3);
    let w = QSeries::compose(&coeff_vec(&w_poly, m as usize + 4), &t)?;
    let w_inv = w.inverse()?;
    let x = t.mul(&w_inv)?;
    let y = w_inv.neg();
    let t_back = x.mul(&y.inverse()?)?.neg();
    if t_back.valid_to().map_or(false, |v| v < target) {
        return Err(Error::TruncationOverflow(format!("t(q) only known through q^{}", t_back.valid_to().unwrap())));
    }
    let outer = SeriesCaps { q_degree: target, ..inner };
    Ok(Parametrization {
        z: z.truncate(target).with_caps(outer)?,
        t: t_back.truncate(target).with_caps(outer)?,
        x: x.with_caps(outer)?,
        y: y.with_caps(outer)?,
    })
}

/// The closed form mod p:
/// `Σ_{(n,p)=1} (a_n/n) q^n − a_p (Σ a_m q^{mp}) q'/q^p + (Σ a_m q^{mp²}) (q'/q^p)^p`.
pub fn fsharp_formula(f: &NewformData, p: u64, a_p: i64, caps: SeriesCaps) -> Result<ModSeries> {
    let m = caps.q_degree;
    if caps.order < 1 {
        return Err(Error::OrderOverflow { needed: 1, max: caps.order });
    }
    if (f.len() as i64) < m {
        return Err(Error::TruncationOverflow(format!("need {m} newform coefficients, have {}", f.len())));
    }
    let ring = ModRing::new(p, 1);
    let pi = p as i64;
    let mut terms: Vec<(i64, JetExp, u64)> = Vec::new();
    for n in (1..=m).filter(|n| n % pi != 0) {
        let c = BigRational::new(BigInt::from(f.a(n as usize).unwrap()), BigInt::from(n));
        terms.push((n, JetExp::one(), ring.from_rational(&c).unwrap()));
    }
    for k in 1..=(m / pi + 1) {
        let c = ring.from_i64(-a_p * f.a(k as usize).unwrap());
        terms.push(((k - 1) * pi, JetExp::var(1), c));
    }
    for k in 1..=(m / (pi * pi) + 1) {
        let c = ring.from_i64(f.a(k as usize).unwrap());
        terms.push(((k - 1) * pi * pi, JetExp::from_exps(&[p as u32]), c));
    }
    DeltaSeries::from_terms(p, ring, caps, Some(m), terms)
}

/// `f♯ = ψ(t, δt, δ²t)` mod p, with `ψ = p^{-1}(ℓ(φ²T) − a_p ℓ(φT) + p ℓ(T))`
/// evaluated on the jet of the modular parametrization, where
/// `φT = T^p + pT'` and `φ²T = (φT)^p + p(T'^p + pT'')`.
pub fn fsharp_construction(e: &EllipticCurveData, f: &NewformData, caps: SeriesCaps) -> Result<ModSeries> {
    if caps.order < 2 {
        return Err(Error::OrderOverflow { needed: 2, max: caps.order });
    }
    let p = e.p;
    let m = caps.q_degree;
    let param = modular_parametrization(e, f, m)?;
    let t = param.t.with_caps(caps)?;
    let l_len = (m + caps.jet_degree as i64 + 2) as usize;
    let (_, log) = elliptic_log(&e.a4, &e.a6, l_len as u32);
    let l = coeff_vec(&log, l_len + 1);
    let scale = l.iter().filter_map(|c| rational_valuation(c, p)).map(|v| (-v).max(0)).max().unwrap_or(0) as u32;
    let k = scale + 4;
    let ring = ModRing::new(p, k);
    let t_k = t.reduce(ring)?;
    let t1 = t_k.delta()?;
    let t2 = t1.delta()?;
    let r2 = ModRing::new(p, k - 2);
    let (t0, t1) = (t_k.reduce(r2)?, t1.reduce(r2)?);
    let pc = p as i64;
    let phi1 = t0.pow(p)?.add(&t1.scale_int(pc))?;
    let phi2 = phi1.pow(p)?.add(&t1.pow(p)?.add(&t2.scale_int(pc))?.scale_int(pc))?;
    let p_scale = BigRational::from_integer(num_traits::pow(BigInt::from(p), scale as usize));
    let lt: Vec<u64> = l.iter().map(|c| r2.from_rational(&(c * &p_scale)).expect("scaled log is integral")).collect();
    let total = ModSeries::compose(&lt, &phi2)?
        .sub(&ModSeries::compose(&lt, &phi1)?.scale_int(e.a_p))?
        .add(&ModSeries::compose(&lt, &t0)?.scale_int(pc))?;
    let mut out = total;
    for _ in 0..=scale {
        out =
            out.div_p().map_err(|_| Error::IntegralityFailure("ψ on the parametrization is not p-integral".into()))?;
    }
    Ok(out)
}

/// Both computations of the f♯ expansion mod p and their difference.
#[derive(Clone, Debug)]
pub struct FsharpReport {
    pub p: u64,
    pub a_p: i64,
    pub formula: ModSeries,
    pub construction: ModSeries,
    pub difference: ModSeries,
}

impl FsharpReport {
    /// The difference vanishes through the common q-degree.
    pub fn congruent(&self) -> bool {
        self.difference.is_zero()
    }

    /// Highest jet order present in the constructed expansion.
    pub fn construction_order(&self) -> u32 {
        self.construction.jet_order()
    }

    /// Through which q-degree the comparison is valid.
    pub fn compared_through(&self) -> Option<i64> {
        self.difference.valid_to()
    }
}

pub fn fsharp_expansion(e: &EllipticCurveData, f: &NewformData, caps: SeriesCaps) -> Result<FsharpReport> {
    let p = e.p;
    if f.level % p == 0 {
        return Err(Error::BadReduction(p));
    }
    if !e.is_ordinary() {
        return Err(Error::NotOrdinary(p));
    }
    let a_p = f.a(p as usize).ok_or_else(|| Error::TruncationOverflow(format!("newform has no a_{p}")))?;
    if a_p != e.a_p {
        return Err(Error::InvalidArgument(format!("newform a_{p} = {a_p} but the curve has a_{p} = {}", e.a_p)));
    }
    let formula = fsharp_formula(f, p, a_p, caps)?;
    let construction = fsharp_construction(e, f, caps)?;
    let difference = construction.sub(&formula)?;
    Ok(FsharpReport { p, a_p, formula, construction, difference })
}

impl<R: SeriesRing> DeltaSeries<R> {
    /// Exact division of every coefficient by p.
    pub fn div_p(&self) -> Result<Self> {
        let lower = self.ring.lowered()?;
        let mut terms = Vec::with_capacity(self.terms.len());
        for (&(a, j), c) in &self.terms {
            let d = self.ring.div_p(self.p, c).ok_or(Error::InexactDivision)?;
            let d = lower.from_rational(&self.ring.to_rational(&d)).ok_or(Error::InexactDivision)?;
            terms.push((a, j, d));
        }
        DeltaSeries::from_terms(self.p, lower, self.caps, self.valid_to, terms)
    }
}

/// `Σ_{(n,p)=1} (a_n/n) q^n` mod p through `q^m`.
pub fn prime_to_p_part(f: &NewformData, p: u64, caps: SeriesCaps) -> Result<ModSeries> {
    let ring = ModRing::new(p, 1);
    let m = caps.q_degree.min(f.len() as i64);
    let terms = (1..=m).filter(|n| n % p as i64 != 0).map(|n| {
        let c = BigRational::new(BigInt::from(f.a(n as usize).unwrap()), BigInt::from(n));
        (n, JetExp::one(), ring.from_rational(&c).unwrap())
    });
    DeltaSeries::from_terms(p, ring, caps, Some(m), terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::curve::x011_short;
    use num_traits::One;

    fn x011(p: u64) -> EllipticCurveData {
        let (a4, a6) = x011_short();
        EllipticCurveData::new(p, a4, a6).unwrap()
    }

    #[test]
    fn x011_coefficients() {
        let f = x011_newform(30);
        assert_eq!(&f.coefficients[..10], &[1, -2, -1, 2, 1, 2, -2, 0, -2, -2]);
        assert!(f.multiplicativity_ok());
        assert!(f.hasse_ok());
        // agrees with point counting at good primes
        for p in [5u64, 7, 13, 17, 19, 23] {
            assert_eq!(f.a(p as usize).unwrap(), x011(p).a_p, "p={p}");
        }
    }

    #[test]
    fn parametrization_lies_on_the_curve() {
        let e = x011(7);
        let f = x011_newform(20);
        let par = modular_parametrization(&e, &f, 12).unwrap();
        let (a4, a6) = (BigRational::from_integer(e.a4.clone()), BigRational::from_integer(e.a6.clone()));
        let y2 = par.y.mul(&par.y).unwrap();
        let rhs = par
            .x
            .pow(3)
            .unwrap()
            .add(&par.x.scale(&a4))
            .unwrap()
            .add(&QSeries::constant(7, Rationals, par.x.caps(), a6))
            .unwrap();
        let m = y2.valid_to().unwrap().min(rhs.valid_to().unwrap());
        assert!(m >= 0, "{m}");
        assert!(y2.agrees_through(&rhs, m));
        // ℓ(t) = z
        let t = &par.t;
        assert_eq!(t.coeff(1, JetExp::one()), BigRational::one());
        assert!(t.valid_to().unwrap() >= 12);
    }

    #[test]
    fn formula_structure() {
        let f = x011_newform(30);
        let caps = SeriesCaps { q_degree: 20, jet_degree: 8, order: 2 };
        let a = fsharp_formula(&f, 7, -2, caps).unwrap();
        assert_eq!(a.fourier_part(), prime_to_p_part(&f, 7, caps).unwrap());
        let a0 = fsharp_formula(&f, 7, 0, caps).unwrap();
        assert!(a0.terms().all(|(_, j, _)| j != JetExp::var(1)));
        assert!(a.is_primitive());
    }

    #[test]
    fn construction_matches_formula_at_seven() {
        let e = x011(7);
        let f = x011_newform(40);
        let caps = SeriesCaps { q_degree: 20, jet_degree: 8, order: 2 };
        let r = fsharp_expansion(&e, &f, caps).unwrap();
        assert_eq!(r.compared_through(), Some(20));
        assert!(r.congruent(), "difference {}", r.difference);
        assert_eq!(r.construction_order(), 1);
    }

    #[test]
    fn bad_prime_rejected() {
        let f = x011_newform(30);
        let (a4, a6) = x011_short();
        let e = EllipticCurveData::with_ap(11, a4, a6, 1);
        assert!(
            e.is_err()
                || matches!(fsharp_expansion(&e.unwrap(), &f, SeriesCaps::default()), Err(Error::BadReduction(11)))
        );
    }
}
