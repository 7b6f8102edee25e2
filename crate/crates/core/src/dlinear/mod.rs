//! δ-Lie algebra calculus on `n×n` matrices: the group law `+_δ`, the
//! action `⋆_δ`, the arithmetic logarithmic derivative, the δ-linear
//! solver, finite-precision δ-Galois groups and classical-group flows.

mod flow;
mod galois;

pub use flow::{
    check_flow_compatibility, matrix_vars, solve_flow_mod_p, DeltaFlow, DiagramCheck, FlowCheckOptions, FlowReport,
    GroupTag, Involution, QuadraticMapData,
};
pub use galois::{delta_galois_group, GaloisSearch, GaloisSet, SubRing};

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::padic::{PadicCtx, PadicElem};

/// A square matrix over `W(F_q)/p^N`, stored row-major.
#[derive(Clone)]
pub struct DeltaMatrix {
    ctx: Arc<PadicCtx>,
    n: usize,
    entries: Vec<PadicElem>,
}

impl fmt::Debug for DeltaMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for DeltaMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.n {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

impl PartialEq for DeltaMatrix {
    /// Entrywise equality at the common precision.
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.entries.iter().zip(&other.entries).all(|(a, b)| a == b)
    }
}

impl DeltaMatrix {
    /// Build from row-major entries; all entries are cut to the smallest precision.
    pub fn new(ctx: &Arc<PadicCtx>, n: usize, entries: Vec<PadicElem>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::LengthMismatch(n * n, entries.len()));
        }
        if entries.iter().any(|e| !Arc::ptr_eq(e.ctx(), ctx) && **e.ctx() != **ctx) {
            return Err(Error::ContextMismatch);
        }
        let prec = entries.iter().map(|e| e.prec()).min().unwrap_or(ctx.precision());
        let entries = entries.into_iter().map(|e| e.reduce_to(prec)).collect();
        Ok(DeltaMatrix { ctx: Arc::clone(ctx), n, entries })
    }

    pub fn from_i64(ctx: &Arc<PadicCtx>, n: usize, rows: &[i64]) -> Result<Self> {
        Self::new(ctx, n, rows.iter().map(|&v| ctx.from_i64(v)).collect())
    }

    pub fn from_fn(ctx: &Arc<PadicCtx>, n: usize, f: impl Fn(usize, usize) -> PadicElem) -> Self {
        let entries = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Self::new(ctx, n, entries).expect("entries built from the same context")
    }

    pub fn zero(ctx: &Arc<PadicCtx>, n: usize) -> Self {
        Self::from_fn(ctx, n, |_, _| ctx.zero())
    }

    pub fn identity(ctx: &Arc<PadicCtx>, n: usize) -> Self {
        Self::from_fn(ctx, n, |i, j| if i == j { ctx.one() } else { ctx.zero() })
    }

    pub fn scalar(ctx: &Arc<PadicCtx>, n: usize, c: &PadicElem) -> Self {
        Self::from_fn(ctx, n, |i, j| if i == j { c.clone() } else { ctx.zero() })
    }

    pub fn diagonal(ctx: &Arc<PadicCtx>, d: &[PadicElem]) -> Self {
        Self::from_fn(ctx, d.len(), |i, j| if i == j { d[i].clone() } else { ctx.zero() })
    }

    /// Permutation matrix with `e_{perm[j]} ` as column `j`.
    pub fn permutation(ctx: &Arc<PadicCtx>, perm: &[usize]) -> Self {
        Self::from_fn(ctx, perm.len(), |i, j| if perm[j] == i { ctx.one() } else { ctx.zero() })
    }

    pub fn random<R: Rng>(ctx: &Arc<PadicCtx>, n: usize, rng: &mut R) -> Self {
        let entries = (0..n * n).map(|_| ctx.random(rng)).collect();
        Self::new(ctx, n, entries).unwrap()
    }

    /// A random matrix invertible over `W(F_q)`.
    pub fn random_invertible<R: Rng>(ctx: &Arc<PadicCtx>, n: usize, rng: &mut R) -> Self {
        loop {
            let m = Self::random(ctx, n, rng);
            if m.is_invertible() {
                return m;
            }
        }
    }

    /// A random element of `T·W`: an invertible diagonal matrix times a permutation.
    pub fn random_monomial<R: Rng>(ctx: &Arc<PadicCtx>, n: usize, rng: &mut R) -> Self {
        let d: Vec<PadicElem> = (0..n).map(|_| ctx.random_unit(rng)).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        Self::diagonal(ctx, &d).mul(&Self::permutation(ctx, &perm))
    }

    pub fn ctx(&self) -> &Arc<PadicCtx> {
        &self.ctx
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn prec(&self) -> u32 {
        self.entries.iter().map(|e| e.prec()).min().unwrap_or(self.ctx.precision())
    }

    pub fn get(&self, i: usize, j: usize) -> &PadicElem {
        &self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[PadicElem] {
        &self.entries
    }

    pub fn map(&self, f: impl Fn(&PadicElem) -> PadicElem) -> Self {
        Self::new(&self.ctx, self.n, self.entries.iter().map(f).collect()).unwrap()
    }

    pub fn try_map(&self, f: impl Fn(&PadicElem) -> Result<PadicElem>) -> Result<Self> {
        let entries = self.entries.iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::new(&self.ctx, self.n, entries)
    }

    pub fn reduce_to(&self, prec: u32) -> Self {
        self.map(|e| e.reduce_to(prec))
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::LengthMismatch(self.n, other.n));
        }
        if !Arc::ptr_eq(&self.ctx, &other.ctx) && *self.ctx != *other.ctx {
            return Err(Error::ContextMismatch);
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.add(other))
    }

    pub fn add(&self, other: &Self) -> Self {
        let e = self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect();
        Self::new(&self.ctx, self.n, e).unwrap()
    }

    pub fn sub(&self, other: &Self) -> Self {
        let e = self.entries.iter().zip(&other.entries).map(|(a, b)| a.sub(b)).collect();
        Self::new(&self.ctx, self.n, e).unwrap()
    }

    pub fn neg(&self) -> Self {
        self.map(|e| e.neg())
    }

    pub fn scale(&self, c: &PadicElem) -> Self {
        self.map(|e| e.mul(c))
    }

    pub fn mul_p_pow(&self, k: u32) -> Self {
        self.map(|e| e.mul_p_pow(k))
    }

    pub fn div_p(&self) -> Result<Self> {
        self.try_map(|e| e.div_p())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.mul(other))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        Self::from_fn(&self.ctx, n, |i, j| {
            let mut acc = self.ctx.zero();
            for k in 0..n {
                acc = acc.add(&self.get(i, k).mul(other.get(k, j)));
            }
            acc
        })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(&self.ctx, self.n, |i, j| self.get(j, i).clone())
    }

    /// Entrywise Frobenius lift of the coefficient ring: `φ(a)`.
    pub fn frobenius(&self) -> Self {
        self.map(|e| e.frobenius())
    }

    /// Entrywise power `a^{(k)} = (a_ij^k)`.
    pub fn pow_entrywise(&self, k: u64) -> Self {
        self.map(|e| e.pow(k).reduce_to(e.prec()))
    }

    /// Entrywise p-derivation; one digit is lost.
    pub fn delta(&self) -> Result<Self> {
        self.try_map(|e| e.fermat_quotient())
    }

    /// Cofactor expansion for `n ≤ 3`, unit-pivot elimination above.
    pub fn det(&self) -> PadicElem {
        if self.n <= 3 {
            return leibniz_det(self);
        }
        match self.lu_det() {
            Some(d) => d,
            None => leibniz_det(self),
        }
    }

    fn lu_det(&self) -> Option<PadicElem> {
        let n = self.n;
        let mut a = self.entries.clone();
        let mut det = self.ctx.one();
        for col in 0..n {
            let piv = (col..n).find(|&r| a[r * n + col].is_unit())?;
            if piv != col {
                for k in 0..n {
                    a.swap(piv * n + k, col * n + k);
                }
                det = det.neg();
            }
            let pv = a[col * n + col].clone();
            det = det.mul(&pv);
            let inv = pv.inverse().ok()?;
            for r in col + 1..n {
                let f = a[r * n + col].mul(&inv);
                for k in col..n {
                    let t = a[col * n + k].mul(&f);
                    a[r * n + k] = a[r * n + k].sub(&t);
                }
            }
        }
        Some(det)
    }

    pub fn is_invertible(&self) -> bool {
        self.det().is_unit()
    }

    /// Inverse by Gauss–Jordan with unit pivots.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let mut a = self.entries.clone();
        let mut b = Self::identity(&self.ctx, n).entries;
        for col in 0..n {
            let piv = (col..n).find(|&r| a[r * n + col].is_unit()).ok_or(Error::NotInvertible)?;
            if piv != col {
                for k in 0..n {
                    a.swap(piv * n + k, col * n + k);
                    b.swap(piv * n + k, col * n + k);
                }
            }
            let inv = a[col * n + col].inverse()?;
            for k in 0..n {
                a[col * n + k] = a[col * n + k].mul(&inv);
                b[col * n + k] = b[col * n + k].mul(&inv);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r * n + col].clone();
                if f.is_zero() {
                    continue;
                }
                for k in 0..n {
                    let ta = a[col * n + k].mul(&f);
                    a[r * n + k] = a[r * n + k].sub(&ta);
                    let tb = b[col * n + k].mul(&f);
                    b[r * n + k] = b[r * n + k].sub(&tb);
                }
            }
        }
        Self::new(&self.ctx, n, b)
    }

    /// Residues mod p, row-major, on the power basis.
    pub fn residue(&self) -> Vec<Vec<u64>> {
        self.entries.iter().map(|e| e.residue()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    /// Smallest valuation among the entries; `None` for the zero matrix.
    pub fn valuation(&self) -> Option<u32> {
        self.entries.iter().filter_map(|e| e.valuation()).min()
    }
}

fn leibniz_det(m: &DeltaMatrix) -> PadicElem {
    let n = m.n;
    if n == 0 {
        return m.ctx.one();
    }
    if n == 1 {
        return m.get(0, 0).clone();
    }
    let mut acc = m.ctx.zero();
    for j in 0..n {
        let minor = DeltaMatrix::from_fn(&m.ctx, n - 1, |r, c| {
            let cc = if c < j { c } else { c + 1 };
            m.get(r + 1, cc).clone()
        });
        let t = m.get(0, j).mul(&leibniz_det(&minor));
        acc = if j % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
    }
    acc
}

/// `a +_δ b = a + b + p·a·b`.
pub fn plus_delta(a: &DeltaMatrix, b: &DeltaMatrix) -> Result<DeltaMatrix> {
    let ab = a.try_mul(b)?;
    Ok(a.add(b).add(&ab.mul_p_pow(1)))
}

/// The inverse of `a` for `+_δ`: `−a(1+pa)^{-1}`.
pub fn plus_delta_inverse(a: &DeltaMatrix) -> Result<DeltaMatrix> {
    let one = DeltaMatrix::identity(a.ctx(), a.size());
    let u = one.add(&a.mul_p_pow(1));
    Ok(a.neg().mul(&u.inverse()?))
}

/// `a ⋆_δ b = φ(a)·b·φ(a)^{-1}`.
pub fn star_delta(a: &DeltaMatrix, b: &DeltaMatrix) -> Result<DeltaMatrix> {
    a.check(b)?;
    let fa = a.frobenius();
    let inv = fa.inverse()?;
    Ok(fa.mul(b).mul(&inv))
}

/// Arithmetic logarithmic derivative `(δa − Δ(a))(a^{(p)} + pΔ(a))^{-1}`.
pub fn ldelta(a: &DeltaMatrix, flow: &DeltaFlow) -> Result<DeltaMatrix> {
    if a.prec() < 2 {
        return Err(Error::InsufficientPrecision { needed: 2, available: a.prec() });
    }
    if !a.is_invertible() {
        return Err(Error::NotInvertible);
    }
    let p = a.ctx().p();
    let big_delta = flow.eval(a)?;
    let da = a.delta()?;
    let num = da.sub(&big_delta);
    let den = a.pow_entrywise(p).add(&big_delta.mul_p_pow(1));
    Ok(num.mul(&den.inverse()?))
}

/// The residual `δu − α·u^{(p)}`, known to one digit fewer than `u`.
pub fn delta_linear_residual(alpha: &DeltaMatrix, u: &DeltaMatrix) -> Result<DeltaMatrix> {
    let p = u.ctx().p();
    Ok(u.delta()?.sub(&alpha.try_mul(&u.pow_entrywise(p))?))
}

/// Solve `δu = α·u^{(p)}` with `u ≡ u₀ mod p`, to precision `target`.
///
/// The equation is `φ(u) = (1+pα)·u^{(p)}`. If `u` solves it mod `p^k`,
/// the correction `u + p^k v` solves it mod `p^{k+1}` exactly when
/// `v^p ≡ −c mod p`, `c` being the next digit of the defect; in `F_q`
/// this has the unique solution `v = (−c)^{q/p}`.
pub fn solve_delta_linear(alpha: &DeltaMatrix, u0: &DeltaMatrix, target: u32) -> Result<DeltaMatrix> {
    alpha.check(u0)?;
    let ctx = alpha.ctx().clone();
    if target == 0 || target > ctx.precision() {
        return Err(Error::InvalidArgument(format!("target precision {target} outside 1..={}", ctx.precision())));
    }
    if !u0.reduce_to(1).is_invertible() {
        return Err(Error::NotInvertibleModP);
    }
    let n = alpha.size();
    let p = ctx.p();
    let root_exp = ctx.residue_field_size() / p;
    let eps = DeltaMatrix::identity(&ctx, n).add(&alpha.mul_p_pow(1)).reduce_to(target);
    // Lift the residues of u₀ with digits 0 above the first.
    let mut u = u0.map(|e| {
        let r: Vec<i64> = e.residue().iter().map(|&x| x as i64).collect();
        ctx.from_coeffs(&r).unwrap().reduce_to(target)
    });
    for k in 1..target {
        let defect = u.frobenius().sub(&eps.mul(&u.pow_entrywise(p))).reduce_to(k + 1);
        let corr = defect.try_map(|d| {
            let c = d.div_p_pow(k)?;
            let minus_c = c.neg().reduce_to(1);
            let v = minus_c.pow(root_exp).reduce_to(1);
            let lifted: Vec<i64> = v.residue().iter().map(|&x| x as i64).collect();
            Ok(ctx.from_coeffs(&lifted)?.mul_p_pow(k).reduce_to(target))
        })?;
        u = u.add(&corr).reduce_to(target);
    }
    Ok(u)
}

trait DivPPow {
    fn div_p_pow(&self, k: u32) -> Result<PadicElem>;
}

impl DivPPow for PadicElem {
    fn div_p_pow(&self, k: u32) -> Result<PadicElem> {
        let mut x = self.clone();
        for _ in 0..k {
            x = x.div_p()?;
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx5() -> Arc<PadicCtx> {
        PadicCtx::new(5, 10).unwrap()
    }

    #[test]
    fn plus_delta_identity_and_inverse() {
        let ctx = ctx5();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let zero = DeltaMatrix::zero(&ctx, 2);
        for _ in 0..20 {
            let a = DeltaMatrix::random(&ctx, 2, &mut rng);
            assert_eq!(plus_delta(&a, &zero).unwrap(), a);
            let b = plus_delta_inverse(&a).unwrap();
            assert!(plus_delta(&a, &b).unwrap().is_zero());
        }
    }

    #[test]
    fn plus_delta_associative() {
        let ctx = ctx5();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let a = DeltaMatrix::random(&ctx, 2, &mut rng);
            let b = DeltaMatrix::random(&ctx, 2, &mut rng);
            let c = DeltaMatrix::random(&ctx, 2, &mut rng);
            let l = plus_delta(&plus_delta(&a, &b).unwrap(), &c).unwrap();
            let r = plus_delta(&a, &plus_delta(&b, &c).unwrap()).unwrap();
            assert_eq!(l, r);
        }
    }

    #[test]
    fn star_delta_trivial_cases() {
        let ctx = ctx5();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = DeltaMatrix::random(&ctx, 2, &mut rng);
        let one = DeltaMatrix::identity(&ctx, 2);
        assert_eq!(star_delta(&one, &b).unwrap(), b);
        let t = DeltaMatrix::scalar(&ctx, 2, &ctx.teichmuller_int(2));
        assert_eq!(star_delta(&t, &b).unwrap(), b);
    }

    #[test]
    fn star_delta_is_an_action_in_extension() {
        let ctx = PadicCtx::with_extension(3, 8, 2, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let a = DeltaMatrix::random_invertible(&ctx, 2, &mut rng);
            let b = DeltaMatrix::random_invertible(&ctx, 2, &mut rng);
            let c = DeltaMatrix::random(&ctx, 2, &mut rng);
            let l = star_delta(&a.mul(&b), &c).unwrap();
            let r = star_delta(&a, &star_delta(&b, &c).unwrap()).unwrap();
            assert_eq!(l, r);
        }
    }

    #[test]
    fn ldelta_vanishes_on_constants() {
        let ctx = ctx5();
        let flow = DeltaFlow::canonical(5, 2);
        let one = DeltaMatrix::identity(&ctx, 2);
        assert!(ldelta(&one, &flow).unwrap().is_zero());
        let t = DeltaMatrix::diagonal(&ctx, &[ctx.teichmuller_int(2), ctx.teichmuller_int(3)]);
        assert!(ldelta(&t, &flow).unwrap().is_zero());
    }

    #[test]
    fn ldelta_nonzero_off_constants() {
        let ctx = ctx5();
        let flow = DeltaFlow::canonical(5, 1);
        let a = DeltaMatrix::from_i64(&ctx, 1, &[2]).unwrap();
        assert!(!ldelta(&a, &flow).unwrap().is_zero());
    }

    #[test]
    fn ldelta_cocycle_on_monomial_matrices() {
        let ctx = ctx5();
        let flow = DeltaFlow::canonical(5, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let a = DeltaMatrix::random_monomial(&ctx, 2, &mut rng);
            let b = DeltaMatrix::random_invertible(&ctx, 2, &mut rng);
            let lhs = ldelta(&a.mul(&b), &flow).unwrap();
            let rhs =
                plus_delta(&star_delta(&a, &ldelta(&b, &flow).unwrap()).unwrap(), &ldelta(&a, &flow).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn solver_gives_teichmuller_for_zero_alpha() {
        let ctx = ctx5();
        let alpha = DeltaMatrix::zero(&ctx, 1);
        for c in 1..5 {
            let u0 = DeltaMatrix::from_i64(&ctx, 1, &[c]).unwrap();
            let u = solve_delta_linear(&alpha, &u0, 10).unwrap();
            assert_eq!(u.get(0, 0), &ctx.teichmuller_int(c as u64));
        }
        let one = DeltaMatrix::identity(&ctx, 2);
        let u = solve_delta_linear(&DeltaMatrix::zero(&ctx, 2), &one, 10).unwrap();
        assert_eq!(u, one);
    }

    #[test]
    fn solver_residual_vanishes() {
        let ctx = ctx5();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let one = DeltaMatrix::identity(&ctx, 2);
        for _ in 0..10 {
            let alpha = DeltaMatrix::random(&ctx, 2, &mut rng);
            let u = solve_delta_linear(&alpha, &one, 10).unwrap();
            let r = delta_linear_residual(&alpha, &u).unwrap();
            assert_eq!(r.prec(), 9);
            assert!(r.is_zero());
            let back = ldelta(&u, &DeltaFlow::canonical(5, 2)).unwrap();
            assert_eq!(back, alpha.reduce_to(9));
        }
    }

    #[test]
    fn solver_in_unramified_extension() {
        let ctx = PadicCtx::with_extension(3, 8, 2, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let alpha = DeltaMatrix::random(&ctx, 2, &mut rng);
        let u0 = DeltaMatrix::random_invertible(&ctx, 2, &mut rng);
        let u = solve_delta_linear(&alpha, &u0, 8).unwrap();
        assert!(delta_linear_residual(&alpha, &u).unwrap().is_zero());
        assert_eq!(u.reduce_to(1), u0.reduce_to(1));
    }

    #[test]
    fn solver_rejects_singular_start() {
        let ctx = ctx5();
        let alpha = DeltaMatrix::zero(&ctx, 2);
        let u0 = DeltaMatrix::from_i64(&ctx, 2, &[1, 2, 2, 4]).unwrap();
        assert!(matches!(solve_delta_linear(&alpha, &u0, 5), Err(Error::NotInvertibleModP)));
    }

    #[test]
    fn inverse_and_det() {
        let ctx = ctx5();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 1..=4 {
            let a = DeltaMatrix::random_invertible(&ctx, n, &mut rng);
            let inv = a.inverse().unwrap();
            assert_eq!(a.mul(&inv), DeltaMatrix::identity(&ctx, n));
            let b = DeltaMatrix::random(&ctx, n, &mut rng);
            assert_eq!(a.mul(&b).det(), a.det().mul(&b.det()));
        }
    }
}
