//! Sparse linear systems over `F_p`.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use num_traits::Zero;

use crate::poly::ModRing;

/// Sparse linear system over `F_p`.
pub(crate) struct SparseSystem<K> {
    p: u64,
    index: HashMap<K, usize>,
    rows: Vec<(BTreeMap<usize, u64>, u64)>,
}

impl<K: Hash + Eq> SparseSystem<K> {
    pub(crate) fn new(p: u64) -> Self {
        SparseSystem { p, index: HashMap::new(), rows: Vec::new() }
    }

    pub(crate) fn row(&mut self, key: K) -> usize {
        let len = self.rows.len();
        let idx = *self.index.entry(key).or_insert(len);
        if idx == len {
            self.rows.push((BTreeMap::new(), 0));
        }
        idx
    }

    pub(crate) fn add(&mut self, key: K, col: usize, c: u64) {
        if c % self.p == 0 {
            return;
        }
        let r = self.row(key);
        let p = self.p;
        let slot = self.rows[r].0.entry(col).or_insert(0);
        *slot = (*slot + c) % p;
        if *slot == 0 {
            self.rows[r].0.remove(&col);
        }
    }

    pub(crate) fn add_rhs(&mut self, key: K, c: u64) {
        let r = self.row(key);
        self.rows[r].1 = (self.rows[r].1 + c) % self.p;
    }

    /// A solution with free variables set to zero, or `None` if inconsistent.
    pub(crate) fn solve(self) -> Option<BTreeMap<usize, u64>> {
        let p = self.p;
        let fp = ModRing::new(p, 1);
        let mut pivots: HashMap<usize, usize> = HashMap::new();
        let mut basis: Vec<(usize, BTreeMap<usize, u64>, u64)> = Vec::new();
        for (mut row, mut rhs) in self.rows {
            loop {
                let hit = row.keys().copied().find(|c| pivots.contains_key(c));
                let Some(col) = hit else { break };
                let f = row[&col];
                let (_, prow, prhs) = &basis[pivots[&col]];
                for (&c, &v) in prow {
                    let slot = row.entry(c).or_insert(0);
                    *slot = (*slot + p - f * v % p) % p;
                    if *slot == 0 {
                        row.remove(&c);
                    }
                }
                rhs = (rhs + p - f * prhs % p) % p;
            }
            match row.keys().next().copied() {
                None if rhs != 0 => return None,
                None => {}
                Some(lead) => {
                    let inv = fp.inverse(row[&lead]).unwrap();
                    for v in row.values_mut() {
                        *v = *v * inv % p;
                    }
                    rhs = rhs * inv % p;
                    pivots.insert(lead, basis.len());
                    basis.push((lead, row, rhs));
                }
            }
        }
        let mut sol: BTreeMap<usize, u64> = BTreeMap::new();
        for (lead, row, rhs) in basis.iter().rev() {
            let mut v = *rhs;
            for (&c, &a) in row {
                if c != *lead {
                    v = (v + p - a * sol.get(&c).copied().unwrap_or(0) % p) % p;
                }
            }
            if v != 0 {
                sol.insert(*lead, v);
            } else {
                sol.remove(lead);
            }
        }
        sol.retain(|_, v| !v.is_zero());
        Some(sol)
    }
}
