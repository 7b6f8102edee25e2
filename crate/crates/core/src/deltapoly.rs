//! δ-polynomials: the ring `R{x} = R[x, x', ..., x^(n)]` with its Frobenius
//! lift φ, p-derivation δ, the universal polynomial `C_p`, and canonical
//! prolongation of derivations.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::padic::{is_prime, PadicCtx, PadicElem};
use crate::poly::{CoeffRing, DegreeCap, JetVar, ModPoly, ModRing, Monomial, Poly, QPoly, Rationals};
use crate::text;

/// Names of the base variables, the jet order bound and the prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetVarSet {
    names: Vec<String>,
    max_order: u32,
    p: u64,
}

impl JetVarSet {
    pub fn new<S: AsRef<str>>(names: &[S], max_order: u32, p: u64) -> Result<Arc<Self>> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        for (i, n) in names.iter().enumerate() {
            if !text::is_identifier(n) || n == "p" {
                return Err(Error::InvalidArgument(format!("bad variable name {n:?}")));
            }
            if names[..i].contains(n) {
                return Err(Error::InvalidArgument(format!("duplicate variable name {n:?}")));
            }
        }
        Ok(Arc::new(JetVarSet { names, max_order, p }))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn num_base(&self) -> usize {
        self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Same names and prime, different order bound.
    pub fn with_order(&self, max_order: u32) -> Arc<Self> {
        Arc::new(JetVarSet { names: self.names.clone(), max_order, p: self.p })
    }

    /// Every jet variable `x_i^(j)` with `j ≤ max_order`, grouped by order.
    pub fn all_vars(&self) -> Vec<JetVar> {
        (0..=self.max_order).flat_map(|j| (0..self.names.len()).map(move |i| JetVar::new(i, j))).collect()
    }

    pub fn var_name(&self, v: JetVar) -> String {
        text::jet_var_name(&self.names[v.base as usize], v.order as u32)
    }
}

/// A polynomial over `Q` (coefficients p-integral or with powers of p in
/// the denominator) in the jet variables of a [`JetVarSet`].
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaPoly {
    vars: Arc<JetVarSet>,
    poly: QPoly,
}

impl DeltaPoly {
    pub fn new(vars: Arc<JetVarSet>, poly: QPoly) -> Self {
        DeltaPoly { vars, poly }
    }

    pub fn zero(vars: &Arc<JetVarSet>) -> Self {
        DeltaPoly::new(vars.clone(), Poly::zero(Rationals))
    }

    pub fn constant(vars: &Arc<JetVarSet>, c: BigRational) -> Self {
        DeltaPoly::new(vars.clone(), Poly::constant(Rationals, c))
    }

    pub fn from_i64(vars: &Arc<JetVarSet>, n: i64) -> Self {
        DeltaPoly::new(vars.clone(), Poly::from_i64(Rationals, n))
    }

    /// The jet variable `x_base^(order)`.
    pub fn var(vars: &Arc<JetVarSet>, base: usize, order: u32) -> Result<Self> {
        if base >= vars.num_base() {
            return Err(Error::InvalidArgument(format!("no base variable with index {base}")));
        }
        if order > vars.max_order {
            return Err(Error::OrderOverflow { needed: order, max: vars.max_order });
        }
        Ok(DeltaPoly::new(vars.clone(), Poly::var(Rationals, JetVar::new(base, order))))
    }

    pub fn parse(vars: &Arc<JetVarSet>, s: &str) -> Result<Self> {
        Ok(DeltaPoly::new(vars.clone(), text::parse_poly(vars, s)?))
    }

    pub fn vars(&self) -> &Arc<JetVarSet> {
        &self.vars
    }

    pub fn poly(&self) -> &QPoly {
        &self.poly
    }

    pub fn into_poly(self) -> QPoly {
        self.poly
    }

    pub fn p(&self) -> u64 {
        self.vars.p
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn is_integral(&self) -> bool {
        self.poly.is_p_integral(self.vars.p)
    }

    /// Highest jet order of a variable that occurs.
    pub fn order(&self) -> Option<u32> {
        self.poly.max_order()
    }

    fn with(&self, poly: QPoly) -> Self {
        DeltaPoly { vars: self.vars.clone(), poly }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.vars != other.vars {
            return Err(Error::ContextMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.with(self.poly.add(&other.poly)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.with(self.poly.sub(&other.poly)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.with(self.poly.mul(&other.poly)))
    }

    pub fn neg(&self) -> Self {
        self.with(self.poly.neg())
    }

    pub fn pow(&self, e: u32) -> Self {
        self.with(self.poly.pow(e))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        self.with(self.poly.scale(c))
    }

    /// Re-home the polynomial into a variable set with a different order bound.
    pub fn with_vars(&self, vars: &Arc<JetVarSet>) -> Result<Self> {
        if vars.names != self.vars.names || vars.p != self.vars.p {
            return Err(Error::ContextMismatch);
        }
        if let Some(o) = self.order() {
            if o > vars.max_order {
                return Err(Error::OrderOverflow { needed: o, max: vars.max_order });
            }
        }
        Ok(DeltaPoly { vars: vars.clone(), poly: self.poly.clone() })
    }

    /// Frobenius lift: `x^(j) ↦ (x^(j))^p + p x^(j+1)`, identity on coefficients.
    pub fn phi(&self) -> Result<Self> {
        Ok(self.with(phi_poly(&self.poly, self.vars.p, self.vars.max_order, None)?))
    }

    /// The p-derivation `(φ(f) − f^p)/p`.
    pub fn delta(&self) -> Result<Self> {
        Ok(self.with(delta_qpoly(&self.poly, self.vars.p, self.vars.max_order)?))
    }

    /// `(f, δf, ..., δ^n f)`.
    pub fn delta_iterates(&self, n: u32) -> Result<Vec<Self>> {
        let mut out = vec![self.clone()];
        for _ in 0..n {
            let next = out.last().unwrap().delta()?;
            out.push(next);
        }
        Ok(out)
    }

    /// Evaluate at p-adic values of the jet variables.
    pub fn eval(&self, ctx: &Arc<PadicCtx>, value: &dyn Fn(JetVar) -> PadicElem) -> Result<PadicElem> {
        eval_qpoly(&self.poly, ctx, value)
    }

    /// Reduce modulo `p^k` (the polynomial must be integral).
    pub fn to_mod(&self, k: u32) -> Result<ModPoly> {
        self.poly.to_mod(ModRing::new(self.vars.p, k)).ok_or(Error::NonIntegralInput)
    }
}

impl fmt::Display for DeltaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::print_poly(&self.vars, &self.poly))
    }
}

/// Images of the Frobenius lift on jet variables.
fn phi_image<R: CoeffRing>(ring: &R, p: u64, v: JetVar) -> Poly<R> {
    let pc = ring.from_i64(p as i64);
    Poly::var(ring.clone(), v).pow(p as u32).add(&Poly::monomial(ring.clone(), Monomial::var(v.prime()), pc))
}

/// φ on any coefficient ring; `cap` truncates intermediate products.
pub fn phi_poly<R: CoeffRing>(f: &Poly<R>, p: u64, max_order: u32, cap: Option<&DegreeCap>) -> Result<Poly<R>> {
    if let Some(o) = f.max_order() {
        if o >= max_order {
            return Err(Error::OrderOverflow { needed: o + 1, max: max_order });
        }
    }
    let ring = f.ring().clone();
    Ok(f.substitute(&|v| Some(phi_image(&ring, p, v)), cap))
}

/// δ on exact rational polynomials; rejects non-integral input.
pub fn delta_qpoly(f: &QPoly, p: u64, max_order: u32) -> Result<QPoly> {
    if !f.is_p_integral(p) {
        return Err(Error::NonIntegralInput);
    }
    let diff = phi_poly(f, p, max_order, None)?.sub(&f.pow(p as u32));
    let out = diff.div_p_pow(p, 1);
    if !out.is_p_integral(p) {
        return Err(Error::InexactDivision);
    }
    Ok(out)
}

/// δ on polynomials mod `p^k`; the result is exact mod `p^(k-1)`.
pub fn delta_modpoly(f: &ModPoly, max_order: u32, cap: Option<&DegreeCap>) -> Result<ModPoly> {
    let p = f.ring().p;
    if f.ring().k < 2 {
        return Err(Error::InsufficientPrecision { needed: 2, available: f.ring().k });
    }
    let diff = phi_poly(f, p, max_order, cap)?.sub(&f.pow_capped(p as u32, cap));
    diff.div_p().ok_or(Error::InexactDivision)
}

/// `C_p(f, g) = (f^p + g^p − (f+g)^p)/p`.
pub fn c_p(f: &DeltaPoly, g: &DeltaPoly) -> Result<DeltaPoly> {
    f.check(g)?;
    let p = f.p() as u32;
    let s = f.poly.pow(p).add(&g.poly.pow(p)).sub(&f.poly.add(&g.poly).pow(p));
    Ok(f.with(s.div_p_pow(f.p(), 1)))
}

/// A derivation of `O(X)`, given by its values on the base variables.
#[derive(Clone, Debug)]
pub struct Derivation {
    images: Vec<DeltaPoly>,
}

impl Derivation {
    /// `images[i]` is ξ applied to the i-th base variable; they must have order 0.
    pub fn new(images: Vec<DeltaPoly>) -> Result<Self> {
        if let Some(first) = images.first() {
            if images.len() != first.vars.num_base() {
                return Err(Error::InvalidArgument("derivation must assign every base variable".into()));
            }
            for im in &images {
                first.check(im)?;
                if im.order().unwrap_or(0) > 0 {
                    return Err(Error::InvalidArgument("derivation images must have jet order 0".into()));
                }
            }
        }
        Ok(Derivation { images })
    }

    /// The images `ξ^(n)(x_i^(j))` for all `j ≤ n`, from `ξ^(n)∘φ = φ∘ξ^(n)`:
    /// `ξ(x^(j+1)) = (φ(ξ(x^(j))) − p (x^(j))^(p−1) ξ(x^(j)))/p`.
    pub fn prolongation_images(&self, n: u32) -> Result<BTreeMap<JetVar, QPoly>> {
        let mut out = BTreeMap::new();
        let Some(first) = self.images.first() else {
            return Ok(out);
        };
        let vars = &first.vars;
        if n > vars.max_order {
            return Err(Error::OrderOverflow { needed: n, max: vars.max_order });
        }
        let p = vars.p;
        for (i, im) in self.images.iter().enumerate() {
            let mut cur = im.poly.clone();
            out.insert(JetVar::new(i, 0), cur.clone());
            for j in 0..n {
                let v = JetVar::new(i, j);
                let phi_cur = phi_poly(&cur, p, vars.max_order, None)?;
                let corr = Poly::var(Rationals, v).pow(p as u32 - 1).mul(&cur).scale_int(p as i64);
                cur = phi_cur.sub(&corr).div_p_pow(p, 1);
                out.insert(v.prime(), cur.clone());
            }
        }
        Ok(out)
    }
}

/// Apply the canonical prolongation `ξ^(n)` to `f`.
pub fn prolong_derivation(xi: &Derivation, f: &DeltaPoly, n: u32) -> Result<DeltaPoly> {
    if let Some(o) = f.order() {
        if o > n {
            return Err(Error::OrderOverflow { needed: o, max: n });
        }
    }
    if xi.images.is_empty() {
        return Ok(DeltaPoly::zero(&f.vars));
    }
    xi.images[0].check(f)?;
    let images = xi.prolongation_images(n)?;
    let mut acc = Poly::zero(Rationals);
    for v in f.poly.vars() {
        let d = f.poly.derivative(v);
        acc = acc.add(&d.mul(&images[&v]));
    }
    Ok(f.with(acc))
}

/// Which notion of symmetry to test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryMode {
    /// `ξ^(n)` kills every generator.
    Variational,
    /// `ξ^(n)` maps every generator into the `Q`-span of the generators.
    Infinitesimal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryReport {
    pub holds: bool,
    /// The first image that violates the property.
    pub witness: Option<DeltaPoly>,
}

pub fn is_variational_symmetry(
    xi: &Derivation,
    generators: &[DeltaPoly],
    n: u32,
    mode: SymmetryMode,
    degree_cap: u32,
) -> Result<SymmetryReport> {
    for g in generators {
        let image = prolong_derivation(xi, g, n)?;
        let ok = match mode {
            SymmetryMode::Variational => image.is_zero(),
            SymmetryMode::Infinitesimal => {
                for h in generators.iter().chain(std::iter::once(&image)) {
                    if h.poly.degree().unwrap_or(0) > degree_cap {
                        return Err(Error::DegreeBoundExceeded(format!(
                            "membership test needs degree {} > cap {degree_cap}",
                            h.poly.degree().unwrap_or(0)
                        )));
                    }
                }
                in_rational_span(&image.poly, &generators.iter().map(|g| g.poly.clone()).collect::<Vec<_>>())
            }
        };
        if !ok {
            return Ok(SymmetryReport { holds: false, witness: Some(image) });
        }
    }
    Ok(SymmetryReport { holds: true, witness: None })
}

/// Is `target` a `Q`-linear combination of `basis`?
pub fn in_rational_span(target: &QPoly, basis: &[QPoly]) -> bool {
    if target.is_zero() {
        return true;
    }
    let mut rows: Vec<BTreeMap<Monomial, BigRational>> = Vec::new();
    let mut pivots: Vec<Monomial> = Vec::new();
    let reduce =
        |mut v: BTreeMap<Monomial, BigRational>, rows: &[BTreeMap<Monomial, BigRational>], pivots: &[Monomial]| {
            for (row, piv) in rows.iter().zip(pivots) {
                if let Some(c) = v.get(piv).cloned() {
                    for (m, a) in row {
                        let e = v.entry(m.clone()).or_insert_with(BigRational::zero);
                        *e -= &c * a;
                        if e.is_zero() {
                            v.remove(m);
                        }
                    }
                }
            }
            v
        };
    for b in basis {
        let v: BTreeMap<Monomial, BigRational> = b.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
        let v = reduce(v, &rows, &pivots);
        if let Some((piv, c)) = v.iter().next_back().map(|(m, c)| (m.clone(), c.clone())) {
            let inv = BigRational::one() / c;
            let row: BTreeMap<Monomial, BigRational> = v.into_iter().map(|(m, a)| (m, a * &inv)).collect();
            // keep rows fully reduced against the new pivot
            for r in rows.iter_mut() {
                if let Some(c) = r.get(&piv).cloned() {
                    for (m, a) in &row {
                        let e = r.entry(m.clone()).or_insert_with(BigRational::zero);
                        *e -= &c * a;
                        if e.is_zero() {
                            r.remove(m);
                        }
                    }
                }
            }
            rows.push(row);
            pivots.push(piv);
        }
    }
    let t: BTreeMap<Monomial, BigRational> = target.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
    reduce(t, &rows, &pivots).is_empty()
}

/// Evaluate a rational polynomial with p-integral coefficients at p-adic values.
pub fn eval_qpoly(f: &QPoly, ctx: &Arc<PadicCtx>, value: &dyn Fn(JetVar) -> PadicElem) -> Result<PadicElem> {
    let mut coeffs = Vec::with_capacity(f.len());
    for (_, c) in f.terms() {
        coeffs.push(ctx.from_rational(c).map_err(|_| Error::NonIntegralInput)?);
    }
    let mut it = coeffs.into_iter();
    let mut acc = ctx.zero();
    let mut cache: BTreeMap<(JetVar, u32), PadicElem> = BTreeMap::new();
    for (m, _) in f.terms() {
        let mut t = it.next().unwrap();
        for &(v, e) in m.pairs() {
            let pw = cache.entry((v, e)).or_insert_with(|| value(v).pow(e as u64)).clone();
            t = t.mul(&pw);
        }
        acc = acc.add(&t);
    }
    Ok(acc)
}

/// Evaluate a polynomial mod `p^k` at p-adic values (result precision ≤ k).
pub fn eval_modpoly(f: &ModPoly, ctx: &Arc<PadicCtx>, value: &dyn Fn(JetVar) -> PadicElem) -> PadicElem {
    let k = f.ring().k;
    let mut acc = ctx.zero();
    let mut cache: BTreeMap<(JetVar, u32), PadicElem> = BTreeMap::new();
    for (m, &c) in f.terms() {
        let mut t = ctx.from_bigint(&BigInt::from(c));
        for &(v, e) in m.pairs() {
            let pw = cache.entry((v, e)).or_insert_with(|| value(v).pow(e as u64)).clone();
            t = t.mul(&pw);
        }
        acc = acc.add(&t);
    }
    acc.reduce_to(k.min(acc.prec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat_frac;

    fn xy(p: u64, n: u32) -> Arc<JetVarSet> {
        JetVarSet::new(&["x", "y"], n, p).unwrap()
    }

    #[test]
    fn phi_examples() {
        let v = xy(2, 2);
        let x = DeltaPoly::var(&v, 0, 0).unwrap();
        assert_eq!(x.phi().unwrap(), DeltaPoly::parse(&v, "x^2 + 2*x'").unwrap());
        assert_eq!(DeltaPoly::from_i64(&v, 1).phi().unwrap(), DeltaPoly::from_i64(&v, 1));
        let v3 = xy(3, 1);
        let s = DeltaPoly::parse(&v3, "x + y").unwrap();
        assert_eq!(s.phi().unwrap(), DeltaPoly::parse(&v3, "x^3 + 3*x' + y^3 + 3*y'").unwrap());
    }

    #[test]
    fn delta_examples() {
        let v = xy(2, 2);
        let x = DeltaPoly::var(&v, 0, 0).unwrap();
        assert_eq!(x.delta().unwrap(), DeltaPoly::var(&v, 0, 1).unwrap());
        assert_eq!(x.pow(2).delta().unwrap(), DeltaPoly::parse(&v, "2*x^2*x' + 2*x'^2").unwrap());
        let s = DeltaPoly::parse(&v, "x + y").unwrap();
        assert_eq!(s.delta().unwrap(), DeltaPoly::parse(&v, "x' + y' - x*y").unwrap());
        let top = DeltaPoly::var(&v, 0, 2).unwrap();
        assert_eq!(top.delta().unwrap_err(), Error::OrderOverflow { needed: 3, max: 2 });
        let frac = DeltaPoly::parse(&v, "p^-1*x").unwrap();
        assert_eq!(frac.delta().unwrap_err(), Error::NonIntegralInput);
    }

    #[test]
    fn c_p_examples() {
        let v2 = xy(2, 1);
        let (x, y) = (DeltaPoly::var(&v2, 0, 0).unwrap(), DeltaPoly::var(&v2, 1, 0).unwrap());
        assert_eq!(c_p(&x, &y).unwrap(), DeltaPoly::parse(&v2, "-x*y").unwrap());
        assert!(c_p(&x, &DeltaPoly::zero(&v2)).unwrap().is_zero());
        let v3 = xy(3, 1);
        let (x, y) = (DeltaPoly::var(&v3, 0, 0).unwrap(), DeltaPoly::var(&v3, 1, 0).unwrap());
        assert_eq!(c_p(&x, &y).unwrap(), DeltaPoly::parse(&v3, "-x^2*y - x*y^2").unwrap());
    }

    #[test]
    fn prolongation_of_d_dx() {
        let v = JetVarSet::new(&["x"], 2, 2).unwrap();
        let xi = Derivation::new(vec![DeltaPoly::from_i64(&v, 1)]).unwrap();
        let xp = DeltaPoly::var(&v, 0, 1).unwrap();
        let img = prolong_derivation(&xi, &xp, 1).unwrap();
        assert_eq!(img, DeltaPoly::parse(&v, "1/2 - x").unwrap());
        assert_eq!(img.poly().constant_term(), rat_frac(1, 2));
        let x = DeltaPoly::var(&v, 0, 0).unwrap();
        assert_eq!(prolong_derivation(&xi, &x, 1).unwrap(), DeltaPoly::from_i64(&v, 1));
        assert!(prolong_derivation(&xi, &DeltaPoly::from_i64(&v, 7), 2).unwrap().is_zero());
    }

    #[test]
    fn symmetry_examples() {
        let v = JetVarSet::new(&["x"], 1, 2).unwrap();
        let x = DeltaPoly::var(&v, 0, 0).unwrap();
        let xp = DeltaPoly::var(&v, 0, 1).unwrap();
        let zero = Derivation::new(vec![DeltaPoly::zero(&v)]).unwrap();
        assert!(is_variational_symmetry(&zero, &[xp.clone()], 1, SymmetryMode::Variational, 8).unwrap().holds);
        let d = Derivation::new(vec![DeltaPoly::from_i64(&v, 1)]).unwrap();
        let r = is_variational_symmetry(&d, &[xp], 1, SymmetryMode::Variational, 8).unwrap();
        assert!(!r.holds);
        assert_eq!(r.witness.unwrap(), DeltaPoly::parse(&v, "1/2 - x").unwrap());
        let e = Derivation::new(vec![x.clone()]).unwrap();
        assert!(is_variational_symmetry(&e, &[x], 0, SymmetryMode::Infinitesimal, 8).unwrap().holds);
    }

    #[test]
    fn mod_delta_agrees_with_exact() {
        let v = xy(3, 2);
        let f = DeltaPoly::parse(&v, "x^2*y + 4*x' - 2").unwrap();
        let exact = f.delta().unwrap().to_mod(4).unwrap();
        let modular = delta_modpoly(&f.to_mod(5).unwrap(), 2, None).unwrap();
        assert_eq!(exact, modular);
    }
}
