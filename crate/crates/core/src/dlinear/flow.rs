//! δ-flows `Φ(x) = x^{(p)} + pΔ(x)` on `GL_n` and the quadratic maps
//! defining `GL_n`, `Sp_{2r}`, `SO_{2r}`, `SO_{2r+1}`.
//!
//! A flow is stored as `Δ(x) = det(x)^{-e}·P(x)` with `P` a matrix of
//! p-integral polynomials in the entries `x_ij`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::DeltaMatrix;
use crate::deltapoly::{eval_qpoly, JetVarSet};
use crate::error::{Error, Result};
use crate::linalg::SparseSystem;
use crate::padic::PadicCtx;
use crate::poly::{CoeffRing, JetVar, ModPoly, ModRing, Monomial, Poly, QPoly, Rationals};
use crate::text;

/// Variable names `x11, x12, ..` (or `x1_10` style past 9) for the entries of an `n×n` matrix.
pub fn matrix_vars(n: usize, p: u64) -> Result<Arc<JetVarSet>> {
    let names: Vec<String> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n + 1, k % n + 1);
            if n <= 9 {
                format!("x{i}{j}")
            } else {
                format!("x{i}_{j}")
            }
        })
        .collect();
    JetVarSet::new(&names, 0, p)
}

fn xvar(n: usize, i: usize, j: usize) -> JetVar {
    JetVar::new(i * n + j, 0)
}

/// `Δ(x) = det(x)^{-e} P(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaFlow {
    p: u64,
    n: usize,
    det_power: u32,
    entries: Vec<QPoly>,
}

impl DeltaFlow {
    /// `Δ = 0`, i.e. `Φ(x) = x^{(p)}`.
    pub fn canonical(p: u64, n: usize) -> Self {
        DeltaFlow { p, n, det_power: 0, entries: vec![QPoly::zero(Rationals); n * n] }
    }

    pub fn new(p: u64, n: usize, det_power: u32, entries: Vec<QPoly>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::LengthMismatch(n * n, entries.len()));
        }
        if entries.iter().any(|e| !e.is_p_integral(p)) {
            return Err(Error::NonIntegralInput);
        }
        if entries.iter().flat_map(|e| e.vars()).any(|v| v.order != 0 || v.base as usize >= n * n) {
            return Err(Error::InvalidArgument("flow entries must use only the matrix variables".into()));
        }
        Ok(DeltaFlow { p, n, det_power, entries })
    }

    /// Parse the entries of `P` (row-major) in the variables of [`matrix_vars`].
    pub fn parse<S: AsRef<str>>(p: u64, n: usize, det_power: u32, entries: &[S]) -> Result<Self> {
        let vars = matrix_vars(n, p)?;
        let polys = entries.iter().map(|s| text::parse_poly(&vars, s.as_ref())).collect::<Result<Vec<_>>>()?;
        Self::new(p, n, det_power, polys)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn det_power(&self) -> u32 {
        self.det_power
    }

    pub fn entries(&self) -> &[QPoly] {
        &self.entries
    }

    pub fn is_canonical(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    /// Entries of `P` as text.
    pub fn to_text(&self) -> Vec<String> {
        let vars = matrix_vars(self.n, self.p).expect("valid names");
        self.entries.iter().map(|e| text::print_poly(&vars, e)).collect()
    }

    /// `Δ(a)`.
    pub fn eval(&self, a: &DeltaMatrix) -> Result<DeltaMatrix> {
        let ctx = a.ctx();
        if a.size() != self.n {
            return Err(Error::LengthMismatch(self.n, a.size()));
        }
        if ctx.p() != self.p {
            return Err(Error::ContextMismatch);
        }
        if self.is_canonical() {
            return Ok(DeltaMatrix::zero(ctx, self.n).reduce_to(a.prec()));
        }
        let scale = a.det().inverse()?.pow(self.det_power as u64);
        let value = |v: JetVar| a.entries()[v.base as usize].clone();
        let entries = self
            .entries
            .iter()
            .map(|f| Ok(eval_qpoly(f, ctx, &value)?.mul(&scale).reduce_to(a.prec())))
            .collect::<Result<Vec<_>>>()?;
        DeltaMatrix::new(ctx, self.n, entries)
    }

    /// `Φ(a) = a^{(p)} + pΔ(a)`.
    pub fn apply(&self, a: &DeltaMatrix) -> Result<DeltaMatrix> {
        Ok(a.pow_entrywise(self.p).add(&self.eval(a)?.mul_p_pow(1)))
    }
}

/// The group defined by a quadratic map on `GL_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupTag {
    GL(usize),
    Sp(usize),
    SOEven(usize),
    SOOdd(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Involution {
    /// `x^† = x^{-1}`, used with `q = 1` for `GL_n`.
    Inverse,
    Transpose,
}

/// `H(x) = x^† q x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticMapData {
    pub tag: GroupTag,
    pub involution: Involution,
    pub n: usize,
    /// Row-major integer entries of `q`.
    pub q: Vec<i64>,
}

impl QuadraticMapData {
    pub fn canonical(tag: GroupTag) -> Self {
        match tag {
            GroupTag::GL(n) => {
                let q = (0..n * n).map(|k| i64::from(k / n == k % n)).collect();
                QuadraticMapData { tag, involution: Involution::Inverse, n, q }
            }
            GroupTag::Sp(r) | GroupTag::SOEven(r) => {
                let n = 2 * r;
                let lower = if matches!(tag, GroupTag::Sp(_)) { -1 } else { 1 };
                let mut q = vec![0i64; n * n];
                for i in 0..r {
                    q[i * n + r + i] = 1;
                    q[(r + i) * n + i] = lower;
                }
                QuadraticMapData { tag, involution: Involution::Transpose, n, q }
            }
            GroupTag::SOOdd(r) => {
                let n = 2 * r + 1;
                let mut q = vec![0i64; n * n];
                q[0] = 1;
                for i in 0..r {
                    q[(1 + i) * n + 1 + r + i] = 1;
                    q[(1 + r + i) * n + 1 + i] = 1;
                }
                QuadraticMapData { tag, involution: Involution::Transpose, n, q }
            }
        }
    }

    /// Parse tags `gl<n>`, `sp<2r>`, `so<n>`.
    pub fn from_name(name: &str) -> Result<Self> {
        let lower = name.to_ascii_lowercase();
        let bad = || Error::InvalidArgument(format!("unknown group {name:?}; expected glN, spN or soN"));
        let (kind, num) = lower.split_at(2.min(lower.len()));
        let n: usize = num.parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        let tag = match kind {
            "gl" => GroupTag::GL(n),
            "sp" if n % 2 == 0 => GroupTag::Sp(n / 2),
            "so" if n % 2 == 0 => GroupTag::SOEven(n / 2),
            "so" => GroupTag::SOOdd(n / 2),
            _ => return Err(bad()),
        };
        Ok(Self::canonical(tag))
    }

    pub fn q_matrix(&self, ctx: &Arc<PadicCtx>) -> DeltaMatrix {
        DeltaMatrix::from_i64(ctx, self.n, &self.q).expect("q has n*n entries")
    }

    /// `H(x)` at a point.
    pub fn eval(&self, x: &DeltaMatrix) -> Result<DeltaMatrix> {
        let q = self.q_matrix(x.ctx());
        match self.involution {
            Involution::Inverse => Ok(x.inverse()?.mul(&q).mul(x)),
            Involution::Transpose => Ok(x.transpose().mul(&q).mul(x)),
        }
    }
}

/// Result of checking one commutative diagram.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagramCheck {
    /// The defect vanishes identically.
    pub exact: bool,
    /// Largest `k` with the defect `≡ 0 mod p^k`, capped at the tested bound.
    pub holds_mod: u32,
    /// First nonzero entry of the defect divided by p, when there is one.
    pub witness: Option<String>,
}

impl DiagramCheck {
    pub fn holds_mod_p_pow(&self, k: u32) -> bool {
        self.exact || self.holds_mod >= k
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowReport {
    pub group: GroupTag,
    pub det_power: u32,
    /// `H(Φ(x)) = H(x)^{(p)}`, scaled by `det(x)^{2e}`.
    pub horizontal: DiagramCheck,
    /// `H₂(x^{(p)}, Φ(x)) = H₂(Φ(x), x^{(p)})`.
    pub symmetric: DiagramCheck,
    /// Largest `k ≤ precision` with `H(Φ(s)) ≡ q mod p^k` on every sampled `s ∈ S`.
    pub s_horizontal_mod: u32,
    pub samples: usize,
    pub precision: u32,
}

#[derive(Clone, Debug)]
pub struct FlowCheckOptions {
    /// Bound on the total degree of the defect polynomials.
    pub max_degree: u32,
    /// Working precision for the sampled points of `S`.
    pub precision: u32,
    pub samples: usize,
    pub seed: u64,
}

impl Default for FlowCheckOptions {
    fn default() -> Self {
        FlowCheckOptions { max_degree: 64, precision: 6, samples: 20, seed: 0 }
    }
}

type PolyMat<R> = Vec<Poly<R>>;

fn pm_mul<R: CoeffRing>(a: &PolyMat<R>, b: &PolyMat<R>, n: usize, ring: &R) -> PolyMat<R> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = Poly::zero(ring.clone());
            for k in 0..n {
                if a[i * n + k].is_zero() || b[k * n + j].is_zero() {
                    continue;
                }
                acc = acc.add(&a[i * n + k].mul(&b[k * n + j]));
            }
            out.push(acc);
        }
    }
    out
}

fn pm_transpose<R: CoeffRing>(a: &PolyMat<R>, n: usize) -> PolyMat<R> {
    (0..n * n).map(|k| a[(k % n) * n + k / n].clone()).collect()
}

fn pm_const<R: CoeffRing>(q: &[i64], ring: &R) -> PolyMat<R> {
    q.iter().map(|&c| Poly::from_i64(ring.clone(), c)).collect()
}

fn pm_det<R: CoeffRing>(a: &PolyMat<R>, n: usize, ring: &R) -> Poly<R> {
    if n == 1 {
        return a[0].clone();
    }
    let mut acc = Poly::zero(ring.clone());
    for j in 0..n {
        if a[j].is_zero() {
            continue;
        }
        let t = a[j].mul(&pm_det(&minor(a, n, 0, j), n - 1, ring));
        acc = if j % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
    }
    acc
}

fn minor<R: CoeffRing>(a: &PolyMat<R>, n: usize, row: usize, col: usize) -> PolyMat<R> {
    let mut out = Vec::with_capacity((n - 1) * (n - 1));
    for i in (0..n).filter(|&i| i != row) {
        for j in (0..n).filter(|&j| j != col) {
            out.push(a[i * n + j].clone());
        }
    }
    out
}

fn pm_adjugate<R: CoeffRing>(a: &PolyMat<R>, n: usize, ring: &R) -> PolyMat<R> {
    if n == 1 {
        return vec![Poly::one(ring.clone())];
    }
    let mut out = vec![Poly::zero(ring.clone()); n * n];
    for i in 0..n {
        for j in 0..n {
            let c = pm_det(&minor(a, n, i, j), n - 1, ring);
            out[j * n + i] = if (i + j) % 2 == 0 { c } else { c.neg() };
        }
    }
    out
}

fn generic_matrix(n: usize) -> PolyMat<Rationals> {
    (0..n * n).map(|k| QPoly::var(Rationals, xvar(n, k / n, k % n))).collect()
}

fn ppower_matrix(n: usize, p: u64) -> PolyMat<Rationals> {
    generic_matrix(n).iter().map(|x| x.pow(p as u32)).collect()
}

fn diagram(defect: &[QPoly], p: u64, bound: u32, vars: &JetVarSet) -> DiagramCheck {
    let v = defect.iter().filter_map(|d| d.content_valuation(p)).min();
    match v {
        None => DiagramCheck { exact: true, holds_mod: bound, witness: None },
        Some(v) => {
            let first = defect.iter().position(|d| !d.is_zero()).unwrap();
            let w = defect[first].div_p_pow(p, 1);
            let n = (defect.len() as f64).sqrt() as usize;
            DiagramCheck {
                exact: false,
                holds_mod: (v.max(0) as u32).min(bound),
                witness: Some(format!("[{},{}] {}", first / n + 1, first % n + 1, text::print_poly(vars, &w))),
            }
        }
    }
}

/// Check horizontality and symmetry of `H` with respect to the flow and
/// `φ_{G,0}(x) = x^{(p)}`, and the induced horizontality of `S` on sampled points.
pub fn check_flow_compatibility(flow: &DeltaFlow, h: &QuadraticMapData, opts: &FlowCheckOptions) -> Result<FlowReport> {
    let n = h.n;
    let p = flow.p;
    if flow.n != n {
        return Err(Error::LengthMismatch(n, flow.n));
    }
    let e = flow.det_power;
    let phi_degree = n as u32 * e + p as u32;
    let defect_degree = match h.involution {
        Involution::Transpose => 2 * phi_degree,
        Involution::Inverse => 2 * phi_degree + (n as u32 - 1) * p as u32,
    };
    if defect_degree > opts.max_degree {
        return Err(Error::TruncationOverflow(format!(
            "defect degree {defect_degree} exceeds bound {}",
            opts.max_degree
        )));
    }
    let vars = matrix_vars(n, p)?;
    let ring = Rationals;
    let x = generic_matrix(n);
    let big_x = ppower_matrix(n, p);
    let det = pm_det(&x, n, &ring);
    let det_e = det.pow(e);
    let pb = BigRational::from_integer(BigInt::from(p));
    // det^e·Φ
    let phi: PolyMat<Rationals> =
        big_x.iter().zip(&flow.entries).map(|(xp, pe)| det_e.mul(xp).add(&pe.scale(&pb))).collect();
    let q = pm_const(&h.q, &ring);
    let bound = opts.precision.max(2);

    let (horizontal, symmetric) = match h.involution {
        Involution::Transpose => {
            let hx = pm_mul(&pm_mul(&pm_transpose(&x, n), &q, n, &ring), &x, n, &ring);
            let det_2e = det_e.mul(&det_e);
            let lhs = pm_mul(&pm_mul(&pm_transpose(&phi, n), &q, n, &ring), &phi, n, &ring);
            let hd: Vec<QPoly> = lhs.iter().zip(&hx).map(|(l, hh)| l.sub(&det_2e.mul(&hh.pow(p as u32)))).collect();
            let xtq = pm_mul(&pm_transpose(&big_x, n), &q, n, &ring);
            let s1 = pm_mul(&xtq, &phi, n, &ring);
            let s2 = pm_mul(&pm_mul(&pm_transpose(&phi, n), &q, n, &ring), &big_x, n, &ring);
            let sd: Vec<QPoly> = s1.iter().zip(&s2).map(|(a, b)| a.sub(b)).collect();
            (diagram(&hd, p, bound, &vars), diagram(&sd, p, bound, &vars))
        }
        Involution::Inverse => {
            // H = 1 is constant, so horizontality is automatic.
            let hd = vec![QPoly::zero(ring); n * n];
            let adj = pm_adjugate(&big_x, n, &ring);
            let det_x = pm_det(&big_x, n, &ring);
            let lhs = pm_mul(&pm_mul(&phi, &adj, n, &ring), &phi, n, &ring);
            let scale = det_e.mul(&det_e).mul(&det_x);
            let sd: Vec<QPoly> = lhs.iter().zip(&big_x).map(|(l, xx)| l.sub(&scale.mul(xx))).collect();
            (diagram(&hd, p, bound, &vars), diagram(&sd, p, bound, &vars))
        }
    };

    let (s_mod, samples) = sample_s_horizontality(flow, h, opts)?;
    Ok(FlowReport {
        group: h.tag,
        det_power: e,
        horizontal,
        symmetric,
        s_horizontal_mod: s_mod,
        samples,
        precision: opts.precision,
    })
}

/// Points of `S` from the Cayley transform `s = (1 − A)(1 + A)^{-1}` with
/// `A = q^{-1}M`, `qA` antisymmetric for symmetric `q` and symmetric for
/// antisymmetric `q`.
fn sample_s_horizontality(flow: &DeltaFlow, h: &QuadraticMapData, opts: &FlowCheckOptions) -> Result<(u32, usize)> {
    let ctx = PadicCtx::new(flow.p, opts.precision)?;
    let n = h.n;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let q = h.q_matrix(&ctx);
    let mut best = opts.precision;
    if h.involution == Involution::Inverse {
        return Ok((best, 0));
    }
    let qinv = q.inverse()?;
    let antisym = h.q.iter().enumerate().all(|(k, &c)| h.q[(k % n) * n + k / n] == -c);
    let one = DeltaMatrix::identity(&ctx, n);
    let mut done = 0;
    while done < opts.samples {
        let mut m = vec![ctx.zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let v = ctx.random(&mut rng);
                if i == j {
                    m[i * n + i] = if antisym { v } else { ctx.zero() };
                } else {
                    m[i * n + j] = v.clone();
                    m[j * n + i] = if antisym { v } else { v.neg() };
                }
            }
        }
        let a = qinv.mul(&DeltaMatrix::new(&ctx, n, m)?);
        let plus = one.add(&a);
        if !plus.is_invertible() {
            continue;
        }
        let s = one.sub(&a).mul(&plus.inverse()?);
        debug_assert!(h.eval(&s)? == q);
        let image = h.eval(&flow.apply(&s)?)?;
        let diff = image.sub(&q);
        let k = diff.valuation().unwrap_or(opts.precision).min(diff.prec());
        best = best.min(k);
        done += 1;
    }
    Ok((best, done))
}

/// Find `P` mod p with `Δ = det^{-e}P` making `H` horizontal mod `p²` and
/// symmetric mod `p²`, for the least `e ≤ max_det_power` admitting a solution.
///
/// With `X = x^{(p)}` and `W = (H(x)^{(p)} − H(X))/p` the conditions read
/// `X^t q P + P^t q X ≡ det^e W` and `X^t q P ≡ P^t q X` mod p, linear in
/// the coefficients of `P`, which is homogeneous of degree `p + n·e`.
pub fn solve_flow_mod_p(h: &QuadraticMapData, p: u64, max_det_power: u32, max_unknowns: usize) -> Result<DeltaFlow> {
    let n = h.n;
    if h.involution == Involution::Inverse {
        // H = 1: symmetry forces 2P ≡ 0.
        return Ok(DeltaFlow::canonical(p, n));
    }
    let qring = Rationals;
    let x = generic_matrix(n);
    let big_x = ppower_matrix(n, p);
    let q = pm_const(&h.q, &qring);
    let hx = pm_mul(&pm_mul(&pm_transpose(&x, n), &q, n, &qring), &x, n, &qring);
    let hxx = pm_mul(&pm_mul(&pm_transpose(&big_x, n), &q, n, &qring), &big_x, n, &qring);
    let w: Vec<QPoly> = hx.iter().zip(&hxx).map(|(a, b)| a.pow(p as u32).sub(b).div_p_pow(p, 1)).collect();
    let det = pm_det(&x, n, &qring);

    let fp = ModRing::new(p, 1);
    let to_fp = |f: &QPoly| f.to_mod(fp).expect("integral");
    let xtq: Vec<ModPoly> = pm_mul(&pm_transpose(&big_x, n), &q, n, &qring).iter().map(to_fp).collect();
    let qx: Vec<ModPoly> = pm_mul(&q, &big_x, n, &qring).iter().map(to_fp).collect();
    let w_fp: Vec<ModPoly> = w.iter().map(to_fp).collect();
    let det_fp = to_fp(&det);

    for e in 0..=max_det_power {
        let d = p as u32 + n as u32 * e;
        let monos = homogeneous_monomials(n * n, d);
        let unknowns = n * n * monos.len();
        if unknowns > max_unknowns {
            return Err(Error::TruncationOverflow(format!(
                "{unknowns} unknown coefficients at det power {e} exceed bound {max_unknowns}"
            )));
        }
        let det_e = det_fp.pow(e);
        let mut sys = SparseSystem::new(p);
        for i in 0..n {
            for j in 0..n {
                for (m, &c) in det_e.mul(&w_fp[i * n + j]).terms() {
                    sys.add_rhs((0, i, j, m.clone()), c);
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                for (mi, mu) in monos.iter().enumerate() {
                    let col = (a * n + b) * monos.len() + mi;
                    for i in 0..n {
                        for (m, &c) in xtq[i * n + a].terms() {
                            let mm = m.mul(mu);
                            sys.add((0, i, b, mm.clone()), col, c);
                            sys.add((1, i, b, mm), col, c);
                        }
                    }
                    for j in 0..n {
                        for (m, &c) in qx[a * n + j].terms() {
                            let mm = m.mul(mu);
                            sys.add((0, b, j, mm.clone()), col, c);
                            sys.add((1, b, j, mm), col, (p - c) % p);
                        }
                    }
                }
            }
        }
        if let Some(sol) = sys.solve() {
            let mut entries = vec![Poly::zero(fp); n * n];
            for (col, v) in sol {
                let (entry, mi) = (col / monos.len(), col % monos.len());
                entries[entry].add_term(monos[mi].clone(), v);
            }
            let lifted = entries.iter().map(|f| f.lift(true)).collect();
            return DeltaFlow::new(p, n, e, lifted);
        }
    }
    Err(Error::TruncationOverflow(format!("no flow found with det power at most {max_det_power}")))
}

fn homogeneous_monomials(k: usize, d: u32) -> Vec<Monomial> {
    fn rec(k: usize, d: u32, idx: usize, cur: &mut Vec<(JetVar, u32)>, out: &mut Vec<Monomial>) {
        if idx + 1 == k {
            let mut pairs = cur.clone();
            if d > 0 {
                pairs.push((JetVar::new(idx, 0), d));
            }
            out.push(Monomial::from_pairs(pairs));
            return;
        }
        for e in 0..=d {
            if e > 0 {
                cur.push((JetVar::new(idx, 0), e));
            }
            rec(k, d - e, idx + 1, cur, out);
            if e > 0 {
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(k, d, 0, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_q_matrices() {
        assert_eq!(QuadraticMapData::canonical(GroupTag::Sp(1)).q, vec![0, 1, -1, 0]);
        assert_eq!(QuadraticMapData::canonical(GroupTag::SOEven(1)).q, vec![0, 1, 1, 0]);
        assert_eq!(QuadraticMapData::canonical(GroupTag::SOOdd(1)).q, vec![1, 0, 0, 0, 0, 1, 0, 1, 0]);
        assert_eq!(QuadraticMapData::canonical(GroupTag::GL(2)).q, vec![1, 0, 0, 1]);
        let sp4 = QuadraticMapData::from_name("sp4").unwrap();
        assert_eq!(sp4.q[2], 1);
        assert_eq!(sp4.q[2 * 4], -1);
    }

    #[test]
    fn gl_canonical_flow_is_horizontal_and_symmetric() {
        let h = QuadraticMapData::canonical(GroupTag::GL(2));
        let r = check_flow_compatibility(&DeltaFlow::canonical(3, 2), &h, &FlowCheckOptions::default()).unwrap();
        assert!(r.horizontal.exact && r.symmetric.exact);
    }

    #[test]
    fn sp2_canonical_flow_is_not_horizontal() {
        let h = QuadraticMapData::canonical(GroupTag::Sp(1));
        let r = check_flow_compatibility(&DeltaFlow::canonical(3, 2), &h, &FlowCheckOptions::default()).unwrap();
        assert!(!r.horizontal.exact);
        assert_eq!(r.horizontal.holds_mod, 1);
        assert!(r.horizontal.witness.is_some());
        assert!(r.symmetric.exact);
        assert!(r.s_horizontal_mod < 2);
    }

    #[test]
    fn solved_sp2_flow_is_horizontal_mod_p2() {
        let h = QuadraticMapData::canonical(GroupTag::Sp(1));
        let flow = solve_flow_mod_p(&h, 3, 4, 5000).unwrap();
        assert!(!flow.is_canonical());
        let r = check_flow_compatibility(&flow, &h, &FlowCheckOptions::default()).unwrap();
        assert!(r.horizontal.holds_mod_p_pow(2), "{r:?}");
        assert!(r.symmetric.holds_mod_p_pow(2), "{r:?}");
        assert!(r.s_horizontal_mod >= 2, "{r:?}");
    }

    #[test]
    fn flow_text_round_trip() {
        let flow = DeltaFlow::parse(3, 2, 1, &["x11^2*x22", "0", "-x12", "x21 + 1"]).unwrap();
        let back = DeltaFlow::parse(3, 2, 1, &flow.to_text()).unwrap();
        assert_eq!(flow, back);
    }

    #[test]
    fn truncation_bound_is_enforced() {
        let h = QuadraticMapData::canonical(GroupTag::Sp(1));
        let flow = DeltaFlow::parse(3, 2, 10, &["0", "0", "0", "0"]).unwrap();
        let opts = FlowCheckOptions { max_degree: 10, ..Default::default() };
        assert!(matches!(check_flow_compatibility(&flow, &h, &opts), Err(Error::TruncationOverflow(_))));
    }
}
