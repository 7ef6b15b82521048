use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;

use crate::bayesnet::{Dag, DataSet};

/// Above this many `(parent config, value)` cells counts go into a hash map.
const DENSE_LIMIT: usize = 1 << 20;

/// Data plus a memo of local BIC scores keyed by `(node, sorted parents)`.
/// Safe to share across threads: reads take a shared lock, insertion an
/// exclusive one.
#[derive(Debug)]
pub struct ScoringContext {
    data: DataSet,
    cache: RwLock<HashMap<(usize, Vec<usize>), f64>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl ScoringContext {
    pub fn new(data: DataSet) -> Self {
        ScoringContext {
            data,
            cache: RwLock::new(HashMap::new()),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    pub fn data(&self) -> &DataSet {
        &self.data
    }

    pub fn m(&self) -> usize {
        self.data.m()
    }

    pub fn width(&self) -> usize {
        self.data.width()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.data.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.data.index_of(name)
    }

    /// `(hits, misses)` of the score cache.
    pub fn cache_stats(&self) -> (u64, u64) {
        (self.hits.load(Ordering::Relaxed), self.misses.load(Ordering::Relaxed))
    }

    /// Cached local score of `x` with parent set `parents` (any order).
    pub fn local_bic(&self, x: usize, parents: &[usize]) -> f64 {
        let mut key_parents = parents.to_vec();
        key_parents.sort_unstable();
        key_parents.dedup();
        let key = (x, key_parents);
        if let Some(&s) = self.cache.read().expect("score cache poisoned").get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return s;
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let s = local_bic_uncached(&self.data, x, &key.1);
        self.cache.write().expect("score cache poisoned").insert(key, s);
        s
    }

    /// Sum of local scores over the families of `dag`, whose node `i`
    /// corresponds to data column `vars[i]`.
    pub fn score_dag(&self, dag: &Dag, vars: &[usize]) -> f64 {
        (0..dag.len())
            .map(|i| {
                let ps: Vec<usize> = dag.parents(i).iter().map(|&p| vars[p]).collect();
                self.local_bic(vars[i], &ps)
            })
            .sum()
    }
}

/// Base-2 BIC of one family, computed from scratch:
/// `sum_jk m_ijk log2(m_ijk / m_ij*) - q_i (r_i - 1) / 2 * log2 m`,
/// with `0 log 0 = 0` and `q_i` the product of parent cardinalities.
pub fn local_bic_uncached(data: &DataSet, x: usize, parents: &[usize]) -> f64 {
    assert!(!parents.contains(&x), "a node cannot be its own parent");
    let m = data.m();
    let r = data.cards[x];
    let q: usize = parents.iter().map(|&p| data.cards[p]).product();
    let penalty = if m == 0 {
        0.0
    } else {
        q as f64 * (r as f64 - 1.0) / 2.0 * (m as f64).log2()
    };
    let config = |row: usize| -> usize {
        parents
            .iter()
            .fold(0usize, |acc, &p| acc * data.cards[p] + data.columns[p][row] as usize)
    };
    let xs = &data.columns[x];

    let mut loglik = 0.0;
    let mut add_row = |counts: &[u64]| {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return;
        }
        let tot = total as f64;
        for &c in counts {
            if c > 0 {
                let c = c as f64;
                loglik += c * (c / tot).log2();
            }
        }
    };
    match q.checked_mul(r) {
        Some(cells) if cells <= DENSE_LIMIT => {
            let mut counts = vec![0u64; cells];
            for row in 0..m {
                counts[config(row) * r + xs[row] as usize] += 1;
            }
            counts.chunks(r).for_each(&mut add_row);
        }
        _ => {
            let mut counts: HashMap<usize, Vec<u64>> = HashMap::new();
            for row in 0..m {
                counts.entry(config(row)).or_insert_with(|| vec![0; r])[xs[row] as usize] += 1;
            }
            counts.values().for_each(|c| add_row(c));
        }
    }
    loglik - penalty
}
