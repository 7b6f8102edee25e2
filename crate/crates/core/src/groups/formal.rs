//! One-dimensional formal group laws and their logarithms.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::deltapoly::{delta_qpoly, phi_poly, JetVarSet};
use crate::error::{Error, Result};
use crate::poly::{DegreeCap, JetVar, Monomial, Poly, QPoly, Rationals};

/// Which group the law comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupKind {
    Additive,
    Multiplicative,
    /// `y² = x³ + a4 x + a6`, parameter `T = −x/y`.
    Elliptic {
        a4: BigInt,
        a6: BigInt,
    },
}

/// A truncated formal group law `F(T1, T2)` with its logarithm.
#[derive(Clone, Debug)]
pub struct FormalGroupData {
    pub kind: GroupKind,
    pub p: u64,
    /// Truncation degree M: all series are known modulo degree > M.
    pub degree: u32,
    /// Variables `T1, T2` (and their jets).
    pub vars: Arc<JetVarSet>,
    /// `F(T1, T2)`.
    pub law: QPoly,
    /// `ℓ(T)`, in the variable `T1`.
    pub log: QPoly,
    /// `ω/dT = ℓ'(T)`, in the variable `T1`.
    pub omega: QPoly,
}

pub(crate) fn t1() -> JetVar {
    JetVar::new(0, 0)
}

pub(crate) fn t2() -> JetVar {
    JetVar::new(1, 0)
}

pub(crate) fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `1/(1 + h)` for `h` without constant term, truncated.
pub fn inverse_one_plus(h: &QPoly, cap: &DegreeCap) -> QPoly {
    let mut acc = Poly::one(Rationals);
    let neg = h.neg();
    let mut pw = Poly::one(Rationals);
    for _ in 0..cap.max {
        pw = pw.mul_capped(&neg, Some(cap));
        if pw.is_zero() {
            break;
        }
        acc = acc.add(&pw);
    }
    acc
}

/// `f(g)` for `f` univariate in `var`.
pub fn compose(f: &QPoly, var: JetVar, g: &QPoly, cap: &DegreeCap) -> QPoly {
    let deg = f.degree().unwrap_or(0);
    let mut acc = Poly::zero(Rationals);
    for n in (0..=deg).rev() {
        acc = acc.mul_capped(g, Some(cap));
        let c = f.coeff(&Monomial::from_pairs(vec![(var, n)]));
        acc.add_term(Monomial::one(), c);
    }
    acc
}

/// Formal antiderivative in `var`.
pub fn integrate(f: &QPoly, var: JetVar) -> QPoly {
    let mut out = Poly::zero(Rationals);
    for (m, c) in f.terms() {
        let (e, rest) = m.split_off(var);
        let mut pairs = rest.pairs().to_vec();
        pairs.push((var, e + 1));
        out.add_term(Monomial::from_pairs(pairs), c / q(e as i64 + 1));
    }
    out
}

fn univariate(coeffs: impl IntoIterator<Item = (u32, BigRational)>) -> QPoly {
    Poly::from_terms(Rationals, coeffs.into_iter().map(|(n, c)| (Monomial::from_pairs(vec![(t1(), n)]), c)))
}

impl FormalGroupData {
    fn vars_for(p: u64) -> Result<Arc<JetVarSet>> {
        JetVarSet::new(&["T1", "T2"], 0, p)
    }

    /// `F = T1 + T2`, `ℓ = T`.
    pub fn additive(p: u64, degree: u32) -> Result<Self> {
        let law = Poly::var(Rationals, t1()).add(&Poly::var(Rationals, t2()));
        Ok(FormalGroupData {
            kind: GroupKind::Additive,
            p,
            degree,
            vars: Self::vars_for(p)?,
            law,
            log: Poly::var(Rationals, t1()),
            omega: Poly::one(Rationals),
        })
    }

    /// `F = T1 + T2 + T1 T2` (coordinate `T = x − 1`), `ℓ = log(1 + T)`.
    pub fn multiplicative(p: u64, degree: u32) -> Result<Self> {
        let law = Poly::var(Rationals, t1())
            .add(&Poly::var(Rationals, t2()))
            .add(&Poly::var(Rationals, t1()).mul(&Poly::var(Rationals, t2())));
        let log = univariate((1..=degree).map(|n| {
            let s = if n % 2 == 1 { 1 } else { -1 };
            (n, BigRational::new(BigInt::from(s), BigInt::from(n)))
        }));
        let omega = univariate((0..degree).map(|n| (n, q(if n % 2 == 0 { 1 } else { -1 }))));
        Ok(FormalGroupData { kind: GroupKind::Multiplicative, p, degree, vars: Self::vars_for(p)?, law, log, omega })
    }

    /// Formal group of `y² = x³ + a4 x + a6` in `T = −x/y`.
    pub fn elliptic(p: u64, a4: &BigInt, a6: &BigInt, degree: u32) -> Result<Self> {
        let w = weierstrass_w(a4, a6, degree);
        let (omega, log) = elliptic_log(a4, a6, degree);
        let law = elliptic_law(a4, a6, &w, degree);
        Ok(FormalGroupData {
            kind: GroupKind::Elliptic { a4: a4.clone(), a6: a6.clone() },
            p,
            degree,
            vars: Self::vars_for(p)?,
            law,
            log,
            omega,
        })
    }

    pub fn cap(&self) -> DegreeCap {
        DegreeCap::total(self.degree)
    }

    /// `ℓ(F(T1,T2)) − ℓ(T1) − ℓ(T2)` truncated at the working degree.
    pub fn log_defect(&self) -> QPoly {
        let cap = self.cap();
        let lhs = compose(&self.log, t1(), &self.law, &cap);
        let l2 = self.log.rename(|v| JetVar::new(1, v.order as u32));
        lhs.sub(&self.log).sub(&l2)
    }

    /// `F(T, 0) − T` and `F(0, T) − T` (both should vanish).
    pub fn unit_defect(&self) -> (QPoly, QPoly) {
        let zero2 = self.law.substitute(
            &|v| {
                if v == t2() {
                    Some(Poly::zero(Rationals))
                } else {
                    None
                }
            },
            None,
        );
        let zero1 = self.law.substitute(
            &|v| {
                if v == t1() {
                    Some(Poly::zero(Rationals))
                } else {
                    None
                }
            },
            None,
        );
        let t = Poly::var(Rationals, t1());
        (zero2.sub(&t), zero1.rename(|_| t1()).sub(&t))
    }

    /// All coefficients of the law are p-integral.
    pub fn law_is_integral(&self) -> bool {
        self.law.is_p_integral(self.p)
    }
}

/// `(ω/dT, ℓ)` for `y² = x³ + a4 x + a6`, with `ℓ` known to degree `degree`.
pub fn elliptic_log(a4: &BigInt, a6: &BigInt, degree: u32) -> (QPoly, QPoly) {
    let cap = DegreeCap::total(degree + 2);
    let w = weierstrass_w(a4, a6, degree + 2);
    // ω/dT = (T w' − w)/(2w); divide numerator and w by T³ first
    let t = Poly::var(Rationals, t1());
    let num = t.mul(&w.derivative(t1())).sub(&w);
    let num3 = shift_down(&num, 3);
    let w3 = shift_down(&w, 3);
    let w3_inv = inverse_one_plus(&w3.sub(&Poly::one(Rationals)), &cap);
    let omega = num3.mul_capped(&w3_inv, Some(&cap)).scale(&BigRational::new(BigInt::one(), BigInt::from(2)));
    let omega = omega.truncate(&DegreeCap::total(degree.saturating_sub(1)));
    let log = integrate(&omega, t1());
    (omega, log)
}

/// Coefficients divided by `T^k` (all terms must have `T`-degree ≥ k).
fn shift_down(f: &QPoly, k: u32) -> QPoly {
    let mut out = Poly::zero(Rationals);
    for (m, c) in f.terms() {
        let e = m.exponent(t1());
        assert!(e >= k, "series not divisible by T^{k}");
        let (_, rest) = m.split_off(t1());
        let mut pairs = rest.pairs().to_vec();
        pairs.push((t1(), e - k));
        out.add_term(Monomial::from_pairs(pairs), c.clone());
    }
    out
}

/// `w(T)` solving `w = T³ + a4 T w² + a6 w³`, truncated at `degree`.
pub fn weierstrass_w(a4: &BigInt, a6: &BigInt, degree: u32) -> QPoly {
    let cap = DegreeCap::total(degree);
    let t = Poly::var(Rationals, t1());
    let t3 = t.pow(3).truncate(&cap);
    let (c4, c6) = (BigRational::from_integer(a4.clone()), BigRational::from_integer(a6.clone()));
    let mut w = t3.clone();
    // each iteration fixes at least two more degrees
    for _ in 0..=degree / 2 {
        let w2 = w.mul_capped(&w, Some(&cap));
        let w3 = w2.mul_capped(&w, Some(&cap));
        let next = t3.add(&t.mul_capped(&w2, Some(&cap)).scale(&c4)).add(&w3.scale(&c6));
        if next == w {
            break;
        }
        w = next;
    }
    w
}

/// Chord construction of the group law in the `(z, w)` plane.
fn elliptic_law(a4: &BigInt, a6: &BigInt, w: &QPoly, degree: u32) -> QPoly {
    let cap = DegreeCap::total(degree);
    let (c4, c6) = (BigRational::from_integer(a4.clone()), BigRational::from_integer(a6.clone()));
    let z1 = Poly::var(Rationals, t1());
    let z2 = Poly::var(Rationals, t2());
    // λ = (w(z2) − w(z1))/(z2 − z1) = Σ A_n (z2^n − z1^n)/(z2 − z1)
    let mut lambda = Poly::zero(Rationals);
    for (m, c) in w.terms() {
        let n = m.exponent(t1());
        for k in 0..n {
            if n - 1 > degree {
                continue;
            }
            let mono = Monomial::from_pairs(vec![(t1(), k), (t2(), n - 1 - k)]);
            lambda.add_term(mono, c.clone());
        }
    }
    let w1 = w.clone();
    let nu = w1.sub(&lambda.mul_capped(&z1, Some(&cap)));
    let l2 = lambda.mul_capped(&lambda, Some(&cap));
    let l3 = l2.mul_capped(&lambda, Some(&cap));
    let numer = lambda
        .mul_capped(&nu, Some(&cap))
        .scale(&(q(2) * &c4))
        .add(&l2.mul_capped(&nu, Some(&cap)).scale(&(q(3) * &c6)));
    let denom_tail = l2.scale(&c4).add(&l3.scale(&c6));
    let frac = numer.mul_capped(&inverse_one_plus(&denom_tail, &cap), Some(&cap));
    z1.add(&z2).add(&frac)
}

/// The composition law of the kernel of `J^n(G) → Ĝ`: the series
/// `δ^j F` restricted to `T1 = T2 = 0`, for `j = 1..n`. The result is
/// expressed in the variables `T1^(j), T2^(j)` with `1 ≤ j ≤ n`.
pub fn kernel_law(fg: &FormalGroupData, n: u32, degree: u32) -> Result<Vec<QPoly>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if degree > fg.degree {
        return Err(Error::TruncationOverflow(format!(
            "kernel law to degree {degree} needs the group law to degree {degree}, have {}",
            fg.degree
        )));
    }
    let p = fg.p;
    let cap = DegreeCap::total(degree);
    let law = fg.law.truncate(&cap);
    // full iterates δ^j F for j < n, each truncated
    let mut full = vec![law];
    for _ in 1..n {
        let g = full.last().unwrap();
        let next = delta_capped(g, p, n, &cap)?;
        full.push(next);
    }
    let zero_base = |v: JetVar| {
        if v.order == 0 {
            Some(Poly::zero(Rationals))
        } else {
            None
        }
    };
    let mut out: Vec<QPoly> = Vec::with_capacity(n as usize);
    for j in 1..=n {
        let g = &full[j as usize - 1];
        // φ(g) at T = 0: T ↦ p T', T^(k) ↦ (T^(k))^p + p T^(k+1)
        let phi_g = phi_poly(g, p, n, Some(&cap))?;
        let phi_g0 = phi_g.substitute(&zero_base, Some(&cap));
        let prev = if j == 1 { Poly::zero(Rationals) } else { out[j as usize - 2].clone() };
        let lj = phi_g0.sub(&prev.pow_capped(p as u32, Some(&cap))).div_p_pow(p, 1);
        if !lj.is_p_integral(p) {
            return Err(Error::InexactDivision);
        }
        out.push(lj);
    }
    Ok(out)
}

/// δ with every intermediate product truncated.
pub fn delta_capped(f: &QPoly, p: u64, max_order: u32, cap: &DegreeCap) -> Result<QPoly> {
    if !f.is_p_integral(p) {
        return Err(Error::NonIntegralInput);
    }
    let diff = phi_poly(f, p, max_order, Some(cap))?.sub(&f.pow_capped(p as u32, Some(cap)));
    Ok(diff.div_p_pow(p, 1))
}

/// Exact δ without truncation, re-exported for symmetry with [`delta_capped`].
pub fn delta_exact(f: &QPoly, p: u64, max_order: u32) -> Result<QPoly> {
    delta_qpoly(f, p, max_order)
}

/// Variables of the kernel law: `T1^(j)` is `JetVar(0, j)`, `T2^(j)` is `JetVar(1, j)`.
/// Associativity defect `L(L(a,b),c) − L(a,L(b,c))` for each component,
/// using three copies of the jet variables (bases 0, 1, 2).
pub fn kernel_associativity_defect(law: &[QPoly], degree: u32) -> Vec<QPoly> {
    let cap = DegreeCap::total(degree);
    let n = law.len() as u32;
    // L with arguments renamed: first argument base a, second base b
    let with_args = |a: u16, b: u16| -> Vec<QPoly> {
        law.iter().map(|l| l.rename(|v| JetVar { base: if v.base == 0 { a } else { b }, order: v.order })).collect()
    };
    let lab = with_args(0, 1);
    let lbc = with_args(1, 2);
    let mut out = Vec::new();
    for j in 0..n as usize {
        // L_j(L(a,b), c)
        let left = law[j].substitute(
            &|v| match v.base {
                0 => Some(lab[v.order as usize - 1].clone()),
                1 => Some(Poly::var(Rationals, JetVar { base: 2, order: v.order })),
                _ => None,
            },
            Some(&cap),
        );
        let right = law[j].substitute(
            &|v| match v.base {
                0 => Some(Poly::var(Rationals, JetVar { base: 0, order: v.order })),
                1 => Some(lbc[v.order as usize - 1].clone()),
                _ => None,
            },
            Some(&cap),
        );
        out.push(left.sub(&right));
    }
    out
}

/// `L(0, b) − b` and `L(a, 0) − a` for each component.
pub fn kernel_unit_defect(law: &[QPoly]) -> Vec<(QPoly, QPoly)> {
    law.iter()
        .enumerate()
        .map(|(j, l)| {
            let order = j as u32 + 1;
            let kill = |base: u16| {
                move |v: JetVar| {
                    if v.base == base {
                        Some(Poly::zero(Rationals))
                    } else {
                        None
                    }
                }
            };
            let a0 = l.substitute(&kill(0), None).sub(&Poly::var(Rationals, JetVar::new(1, order)));
            let b0 = l.substitute(&kill(1), None).sub(&Poly::var(Rationals, JetVar::new(0, order)));
            (a0, b0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn additive_kernel_law() {
        let fg = FormalGroupData::additive(5, 8).unwrap();
        let law = kernel_law(&fg, 1, 8).unwrap();
        let expected = Poly::var(Rationals, JetVar::new(0, 1)).add(&Poly::var(Rationals, JetVar::new(1, 1)));
        assert_eq!(law[0], expected);
    }

    #[test]
    fn multiplicative_kernel_law() {
        let fg = FormalGroupData::multiplicative(3, 8).unwrap();
        let law = kernel_law(&fg, 1, 8).unwrap();
        let (a, b) = (Poly::var(Rationals, JetVar::new(0, 1)), Poly::var(Rationals, JetVar::new(1, 1)));
        assert_eq!(law[0], a.add(&b).add(&a.mul(&b).scale(&q(3))));
    }

    #[test]
    fn multiplicative_log_is_additive() {
        let fg = FormalGroupData::multiplicative(5, 12).unwrap();
        assert!(fg.log_defect().is_zero());
    }

    #[test]
    fn elliptic_law_and_log() {
        let fg = FormalGroupData::elliptic(7, &BigInt::from(-13392), &BigInt::from(-1080432), 12).unwrap();
        let (u1, u2) = fg.unit_defect();
        assert!(u1.is_zero() && u2.is_zero());
        assert!(fg.log_defect().is_zero());
        assert_eq!(fg.omega.constant_term(), q(1));
        assert!(fg.law_is_integral());
    }
}
