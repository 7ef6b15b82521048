use super::bic::ScoringContext;
use super::pdag::Pdag;
use crate::error::{Error, Result};

/// Default largest variable set accepted by [`learn_local_dag`].
pub const DEFAULT_CAP: usize = 12;

/// Score deltas closer than this are treated as equal.
pub const TIE_EPS: f64 = 1e-9;

/// Largest set whose subsets are enumerated as operator arguments.
const MAX_SUBSET_BASE: usize = 10;

/// Equivalence class learned over a subset of data columns.
/// Local node `i` is data column `vars[i]`; `vars` is sorted by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalGraph {
    pub vars: Vec<usize>,
    pub pdag: Pdag,
}

impl LocalGraph {
    fn local(&self, x: usize) -> Option<usize> {
        self.vars.iter().position(|&v| v == x)
    }

    pub fn adjacent(&self, x: usize, y: usize) -> bool {
        matches!((self.local(x), self.local(y)), (Some(a), Some(b)) if self.pdag.adjacent(a, b))
    }

    /// `x -> y` in the learned class.
    pub fn directed(&self, x: usize, y: usize) -> bool {
        matches!((self.local(x), self.local(y)), (Some(a), Some(b)) if self.pdag.directed(a, b))
    }

    pub fn undirected(&self, x: usize, y: usize) -> bool {
        matches!((self.local(x), self.local(y)), (Some(a), Some(b)) if self.pdag.undirected(a, b))
    }

    /// Data columns adjacent to `x`.
    pub fn neighbors(&self, x: usize) -> Vec<usize> {
        self.local(x)
            .map(|a| self.pdag.neighbors(a).into_iter().map(|b| self.vars[b]).collect())
            .unwrap_or_default()
    }

    /// Score of a consistent extension.
    pub fn score(&self, ctx: &ScoringContext) -> f64 {
        let parents = self.pdag.to_dag().expect("learned class has an extension");
        parents
            .iter()
            .enumerate()
            .map(|(i, ps)| {
                let ps: Vec<usize> = ps.iter().map(|&p| self.vars[p]).collect();
                ctx.local_bic(self.vars[i], &ps)
            })
            .sum()
    }
}

fn subsets(items: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let base = items.len().min(MAX_SUBSET_BASE);
    (0u32..1 << base).map(move |mask| {
        items[..base]
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &v)| v)
            .collect()
    })
}

struct Search<'a> {
    ctx: &'a ScoringContext,
    vars: Vec<usize>,
    g: Pdag,
}

enum Op {
    Insert { x: usize, y: usize, t: Vec<usize> },
    Delete { x: usize, y: usize, h: Vec<usize> },
}

impl Search<'_> {
    fn family_score(&self, y: usize, parents: &[usize]) -> f64 {
        let ps: Vec<usize> = parents.iter().map(|&p| self.vars[p]).collect();
        self.ctx.local_bic(self.vars[y], &ps)
    }

    fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
        let mut v = a.to_vec();
        v.extend_from_slice(b);
        v.sort_unstable();
        v.dedup();
        v
    }

    fn best_insert(&self) -> Option<(f64, Op)> {
        let k = self.vars.len();
        let mut best: Option<(f64, Op)> = None;
        for x in 0..k {
            for y in 0..k {
                if x == y || self.g.adjacent(x, y) {
                    continue;
                }
                let nu = self.g.undirected_neighbors(y);
                let na: Vec<usize> = nu.iter().copied().filter(|&w| self.g.adjacent(w, x)).collect();
                let t0: Vec<usize> = nu.iter().copied().filter(|&w| w != x && !self.g.adjacent(w, x)).collect();
                let pa = self.g.parents(y);
                for t in subsets(&t0) {
                    let nat = Self::union(&na, &t);
                    if !self.g.is_clique(&nat) || self.g.semi_directed_path(y, x, &nat) {
                        continue;
                    }
                    let base = Self::union(&pa, &nat);
                    let with = Self::union(&base, &[x]);
                    let delta = self.family_score(y, &with) - self.family_score(y, &base);
                    if delta > best.as_ref().map_or(TIE_EPS, |b| b.0 + TIE_EPS) {
                        best = Some((delta, Op::Insert { x, y, t }));
                    }
                }
            }
        }
        best
    }

    fn best_delete(&self) -> Option<(f64, Op)> {
        let k = self.vars.len();
        let mut best: Option<(f64, Op)> = None;
        for x in 0..k {
            for y in 0..k {
                if !(self.g.directed(x, y) || self.g.undirected(x, y)) {
                    continue;
                }
                let na: Vec<usize> = self
                    .g
                    .undirected_neighbors(y)
                    .into_iter()
                    .filter(|&w| w != x && self.g.adjacent(w, x))
                    .collect();
                let pa = self.g.parents(y);
                for h in subsets(&na) {
                    let rest: Vec<usize> = na.iter().copied().filter(|w| !h.contains(w)).collect();
                    if !self.g.is_clique(&rest) {
                        continue;
                    }
                    let base: Vec<usize> = Self::union(&pa, &rest).into_iter().filter(|&w| w != x).collect();
                    let with = Self::union(&base, &[x]);
                    let delta = self.family_score(y, &base) - self.family_score(y, &with);
                    if delta > best.as_ref().map_or(TIE_EPS, |b| b.0 + TIE_EPS) {
                        best = Some((delta, Op::Delete { x, y, h }));
                    }
                }
            }
        }
        best
    }

    fn apply(&mut self, op: Op) {
        match op {
            Op::Insert { x, y, t } => {
                self.g.add_directed(x, y);
                for w in t {
                    self.g.add_directed(w, y);
                }
            }
            Op::Delete { x, y, h } => {
                self.g.remove(x, y);
                for w in h {
                    self.g.add_directed(y, w);
                    if self.g.undirected(x, w) {
                        self.g.add_directed(x, w);
                    }
                }
            }
        }
        let dag = self
            .g
            .to_dag()
            .expect("valid operators keep the graph extendable");
        self.g = Pdag::cpdag_of(&dag);
    }
}

/// Two-phase greedy equivalence search over the data columns `vars`.
pub fn learn_local_dag(ctx: &ScoringContext, vars: &[usize]) -> Result<LocalGraph> {
    learn_local_dag_capped(ctx, vars, DEFAULT_CAP)
}

pub fn learn_local_dag_capped(ctx: &ScoringContext, vars: &[usize], cap: usize) -> Result<LocalGraph> {
    let mut vars = vars.to_vec();
    vars.sort_by(|&a, &b| ctx.name(a).cmp(ctx.name(b)));
    vars.dedup();
    if vars.len() > cap {
        return Err(Error::Capability(format!(
            "local search over {} variables exceeds the cap of {cap}",
            vars.len()
        )));
    }
    let k = vars.len();
    let mut s = Search {
        ctx,
        vars,
        g: Pdag::new(k),
    };
    while let Some((_, op)) = s.best_insert() {
        s.apply(op);
    }
    while let Some((_, op)) = s.best_delete() {
        s.apply(op);
    }
    Ok(LocalGraph { vars: s.vars, pdag: s.g })
}

/// Highest-scoring DAG over `vars` by dynamic programming over subsets.
/// Returns its score and parent lists in local indices (`vars` order).
pub fn exact_best_dag(ctx: &ScoringContext, vars: &[usize]) -> Result<(f64, Vec<Vec<usize>>)> {
    let k = vars.len();
    if k > 10 {
        return Err(Error::Capability(format!("exact search over {k} variables exceeds 10")));
    }
    let full = 1usize << k;
    // best parent set of i restricted to each candidate mask
    let mut best_ps = vec![vec![(f64::NEG_INFINITY, 0usize); full]; k];
    for (i, table) in best_ps.iter_mut().enumerate() {
        for mask in 0..full {
            if mask >> i & 1 == 1 {
                continue;
            }
            let ps: Vec<usize> = (0..k).filter(|&j| mask >> j & 1 == 1).map(|j| vars[j]).collect();
            let own = (ctx.local_bic(vars[i], &ps), mask);
            let mut best = own;
            for j in 0..k {
                if mask >> j & 1 == 1 {
                    let sub = table[mask & !(1 << j)];
                    if sub.0 > best.0 {
                        best = sub;
                    }
                }
            }
            table[mask] = best;
        }
    }
    // best network on each subset, choosing its last node as a sink
    let mut net = vec![(0.0f64, usize::MAX); full];
    for mask in 1..full {
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for i in 0..k {
            if mask >> i & 1 == 1 {
                let rest = mask & !(1 << i);
                let s = net[rest].0 + best_ps[i][rest].0;
                if s > best.0 {
                    best = (s, i);
                }
            }
        }
        net[mask] = best;
    }
    let mut parents = vec![Vec::new(); k];
    let mut mask = full - 1;
    while mask != 0 {
        let sink = net[mask].1;
        let rest = mask & !(1 << sink);
        let pm = best_ps[sink][rest].1;
        parents[sink] = (0..k).filter(|&j| pm >> j & 1 == 1).collect();
        mask = rest;
    }
    Ok((net[full - 1].0, parents))
}
