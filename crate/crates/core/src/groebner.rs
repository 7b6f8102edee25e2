//! Buchberger's algorithm over `F_p` in graded reverse lexicographic order.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::poly::{JetVar, ModPoly, ModRing, Monomial, Poly};

/// Dense exponent vector ordered by grevlex.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
struct Mon(Vec<u32>);

impl Mon {
    fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn divides(&self, other: &Mon) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    fn lcm(&self, other: &Mon) -> Mon {
        Mon(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    fn div(&self, other: &Mon) -> Mon {
        Mon(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    fn mul(&self, other: &Mon) -> Mon {
        Mon(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn coprime(&self, other: &Mon) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a == 0 || *b == 0)
    }
}

impl Ord for Mon {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        for (a, b) in self.0.iter().zip(&other.0).rev() {
            if a != b {
                return b.cmp(a);
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Mon {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial over F_p, terms sorted in decreasing order, leading coefficient 1
/// once normalized.
#[derive(Clone, Debug, PartialEq)]
struct GPoly(Vec<(Mon, u64)>);

impl GPoly {
    fn lead(&self) -> &Mon {
        &self.0[0].0
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn monic(mut self, f: &Fp) -> GPoly {
        if let Some(&(_, c)) = self.0.first() {
            let inv = f.inv(c);
            for t in &mut self.0 {
                t.1 = f.mul(t.1, inv);
            }
        }
        self
    }
}

#[derive(Clone, Copy, Debug)]
struct Fp(u64);

impl Fp {
    fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.0 as u128) as u64
    }

    fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.0 - b) % self.0
    }

    fn inv(&self, a: u64) -> u64 {
        let mut r = 1u64;
        let mut b = a % self.0;
        let mut e = self.0 - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }
}

/// Limits on the Buchberger run.
#[derive(Clone, Copy, Debug)]
pub struct GroebnerCaps {
    pub max_basis: usize,
    pub max_degree: u32,
    pub max_pairs: usize,
}

impl Default for GroebnerCaps {
    fn default() -> Self {
        GroebnerCaps { max_basis: 5000, max_degree: 400, max_pairs: 200_000 }
    }
}

/// A reduced Gröbner basis of an ideal of `F_p[vars]`.
#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    p: u64,
    vars: Vec<JetVar>,
    basis: Vec<GPoly>,
}

impl GroebnerBasis {
    /// Compute a reduced basis of the ideal generated by `gens` (which must be
    /// polynomials mod p) in the ring on `vars`.
    pub fn compute(p: u64, vars: &[JetVar], gens: &[ModPoly], caps: GroebnerCaps) -> Result<Self> {
        let fp = Fp(p);
        let mut vars = vars.to_vec();
        vars.sort();
        vars.dedup();
        let mut input = Vec::new();
        for g in gens {
            let gp = to_gpoly(g, &vars, p)?;
            if !gp.is_zero() {
                input.push(gp.monic(&fp));
            }
        }
        let mut gb = GroebnerBasis { p, vars, basis: Vec::new() };
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        let mut processed = 0usize;
        let mut queue = input;
        queue.sort_by(|a, b| a.lead().cmp(b.lead()));
        for g in queue {
            let r = gb.reduce_full(&g);
            if !r.is_zero() {
                gb.insert(r.monic(&fp), &mut pairs, caps)?;
            }
        }
        while !pairs.is_empty() {
            // normal selection strategy: smallest lcm first
            let (idx, _) = pairs
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    let la = gb.basis[a.0].lead().lcm(gb.basis[a.1].lead());
                    let lb = gb.basis[b.0].lead().lcm(gb.basis[b.1].lead());
                    la.cmp(&lb)
                })
                .unwrap();
            let (i, j) = pairs.swap_remove(idx);
            processed += 1;
            if processed > caps.max_pairs {
                return Err(Error::CapExceeded(format!("more than {} critical pairs", caps.max_pairs)));
            }
            let (li, lj) = (gb.basis[i].lead().clone(), gb.basis[j].lead().clone());
            if li.coprime(&lj) {
                continue;
            }
            let l = li.lcm(&lj);
            if l.degree() > caps.max_degree {
                return Err(Error::DegreeBoundExceeded(format!("S-polynomial of degree {}", l.degree())));
            }
            // chain criterion: skip if some other lead divides the lcm and both
            // companion pairs have already been handled
            let pending = |a: usize, b: usize| pairs.contains(&(a.min(b), a.max(b)));
            let chain = (0..gb.basis.len()).any(|k| {
                k != i
                    && k != j
                    && gb.basis[k].lead().divides(&l)
                    && !pending(i, k)
                    && !pending(j, k)
                    && gb.basis[k].lead().lcm(&li) != l
                    && gb.basis[k].lead().lcm(&lj) != l
            });
            if chain {
                continue;
            }
            let s = spoly(&gb.basis[i], &gb.basis[j], &fp);
            let r = gb.reduce_full(&s);
            if !r.is_zero() {
                gb.insert(r.monic(&fp), &mut pairs, caps)?;
            }
        }
        gb.interreduce();
        Ok(gb)
    }

    fn insert(&mut self, g: GPoly, pairs: &mut Vec<(usize, usize)>, caps: GroebnerCaps) -> Result<()> {
        if g.lead().degree() > caps.max_degree {
            return Err(Error::DegreeBoundExceeded(format!("basis element of degree {}", g.lead().degree())));
        }
        let k = self.basis.len();
        for i in 0..k {
            pairs.push((i, k));
        }
        self.basis.push(g);
        if self.basis.len() > caps.max_basis {
            return Err(Error::CapExceeded(format!("Gröbner basis exceeds {} elements", caps.max_basis)));
        }
        Ok(())
    }

    fn reduce_full(&self, f: &GPoly) -> GPoly {
        let fp = Fp(self.p);
        let mut work: BTreeMap<Mon, u64> = f.0.iter().cloned().collect();
        let mut rem: Vec<(Mon, u64)> = Vec::new();
        while let Some((m, c)) = work.pop_last() {
            let divisor = self.basis.iter().find(|g| g.lead().divides(&m));
            match divisor {
                Some(g) => {
                    let q = m.div(g.lead());
                    for (gm, gc) in &g.0[1..] {
                        let t = gm.mul(&q);
                        let sub = fp.mul(c, *gc);
                        let e = work.entry(t.clone()).or_insert(0);
                        *e = fp.sub(*e, sub);
                        if *e == 0 {
                            work.remove(&t);
                        }
                    }
                }
                None => rem.push((m, c)),
            }
        }
        GPoly(rem)
    }

    fn interreduce(&mut self) {
        let fp = Fp(self.p);
        // drop elements whose leading monomial is divisible by another's
        let mut keep: Vec<GPoly> = Vec::new();
        let mut all = std::mem::take(&mut self.basis);
        all.sort_by(|a, b| a.lead().cmp(b.lead()));
        for g in all {
            if !keep.iter().any(|h| h.lead().divides(g.lead())) {
                keep.push(g);
            }
        }
        let mut out = Vec::with_capacity(keep.len());
        for i in 0..keep.len() {
            let others = GroebnerBasis {
                p: self.p,
                vars: self.vars.clone(),
                basis: keep.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, g)| g.clone()).collect(),
            };
            let lead = keep[i].0[0].clone();
            let tail = GPoly(keep[i].0[1..].to_vec());
            let mut r = others.reduce_full(&tail).0;
            r.insert(0, lead);
            out.push(GPoly(r).monic(&fp));
        }
        out.sort_by(|a, b| b.lead().cmp(a.lead()));
        self.basis = out;
    }

    /// Is `g` (reduced mod p) in the ideal?
    pub fn contains(&self, g: &ModPoly) -> Result<bool> {
        let gp = to_gpoly(g, &self.vars, self.p)?;
        Ok(self.reduce_full(&gp).is_zero())
    }

    /// Normal form of `g` with respect to the basis.
    pub fn normal_form(&self, g: &ModPoly) -> Result<ModPoly> {
        let gp = to_gpoly(g, &self.vars, self.p)?;
        Ok(self.from_gpoly(&self.reduce_full(&gp)))
    }

    pub fn is_unit_ideal(&self) -> bool {
        self.basis.iter().any(|g| g.lead().degree() == 0)
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Basis elements as polynomials mod p, in decreasing order of leading term.
    pub fn elements(&self) -> Vec<ModPoly> {
        self.basis.iter().map(|g| self.from_gpoly(g)).collect()
    }

    fn from_gpoly(&self, g: &GPoly) -> ModPoly {
        let ring = ModRing::new(self.p, 1);
        Poly::from_terms(
            ring,
            g.0.iter().map(|(m, c)| {
                let pairs = m.0.iter().zip(&self.vars).map(|(&e, &v)| (v, e)).collect();
                (Monomial::from_pairs(pairs), *c)
            }),
        )
    }
}

fn to_gpoly(g: &ModPoly, vars: &[JetVar], p: u64) -> Result<GPoly> {
    let mut terms = Vec::with_capacity(g.len());
    for (m, &c) in g.terms() {
        let c = c % p;
        if c == 0 {
            continue;
        }
        let mut e = vec![0u32; vars.len()];
        for &(v, k) in m.pairs() {
            let idx = vars
                .binary_search(&v)
                .map_err(|_| Error::InvalidArgument(format!("variable {v:?} outside the Gröbner ring")))?;
            e[idx] = k;
        }
        terms.push((Mon(e), c));
    }
    terms.sort_by(|a, b| b.0.cmp(&a.0));
    Ok(GPoly(terms))
}

fn spoly(f: &GPoly, g: &GPoly, fp: &Fp) -> GPoly {
    let l = f.lead().lcm(g.lead());
    let (qf, qg) = (l.div(f.lead()), l.div(g.lead()));
    let mut acc: BTreeMap<Mon, u64> = BTreeMap::new();
    for (m, c) in &f.0[1..] {
        let e = acc.entry(m.mul(&qf)).or_insert(0);
        *e = (*e + c) % fp.0;
    }
    for (m, c) in &g.0[1..] {
        let e = acc.entry(m.mul(&qg)).or_insert(0);
        *e = fp.sub(*e, *c);
    }
    let mut terms: Vec<(Mon, u64)> = acc.into_iter().filter(|&(_, c)| c != 0).collect();
    terms.reverse();
    GPoly(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deltapoly::{DeltaPoly, JetVarSet};

    #[test]
    fn twisted_cubic_membership() {
        let v = JetVarSet::new(&["x", "y", "z"], 0, 7).unwrap();
        let gens: Vec<ModPoly> =
            ["y - x^2", "z - x^3"].iter().map(|s| DeltaPoly::parse(&v, s).unwrap().to_mod(1).unwrap()).collect();
        let vars = v.all_vars();
        let gb = GroebnerBasis::compute(7, &vars, &gens, GroebnerCaps::default()).unwrap();
        let yes = DeltaPoly::parse(&v, "x*z - y^2").unwrap().to_mod(1).unwrap();
        let no = DeltaPoly::parse(&v, "x*z - y").unwrap().to_mod(1).unwrap();
        assert!(gb.contains(&yes).unwrap());
        assert!(!gb.contains(&no).unwrap());
        assert!(!gb.is_unit_ideal());
    }

    #[test]
    fn unit_ideal_detected() {
        let v = JetVarSet::new(&["x"], 0, 5).unwrap();
        let gens: Vec<ModPoly> =
            ["x^2 - 1", "x^3"].iter().map(|s| DeltaPoly::parse(&v, s).unwrap().to_mod(1).unwrap()).collect();
        let gb = GroebnerBasis::compute(5, &v.all_vars(), &gens, GroebnerCaps::default()).unwrap();
        assert!(gb.is_unit_ideal());
        assert_eq!(gb.len(), 1);
    }
}
