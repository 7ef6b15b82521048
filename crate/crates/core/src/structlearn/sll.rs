use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::bic::ScoringContext;
use super::ges::{learn_local_dag_capped, LocalGraph, DEFAULT_CAP};
use crate::error::Result;

/// Passes over all candidates before the growing set is declared stable.
const MAX_PASSES: usize = 4;

/// Neighbourhood of one variable, as data column indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalStructure {
    pub target: usize,
    pub h_star: BTreeSet<usize>,
    pub pa: BTreeSet<usize>,
    pub ch: BTreeSet<usize>,
    /// spouse -> witness child
    pub s_star: BTreeMap<usize, usize>,
}

/// Memoizing driver for neighbour and spouse discovery on one data set.
#[derive(Debug)]
pub struct LocalLearner<'a> {
    ctx: &'a ScoringContext,
    cap: usize,
    learned: HashMap<Vec<usize>, LocalGraph>,
    candidates: HashMap<usize, BTreeSet<usize>>,
    neighbors: HashMap<usize, LocalStructure>,
    raw_spouses: HashMap<usize, BTreeMap<usize, usize>>,
    spouses: HashMap<usize, BTreeMap<usize, usize>>,
}

impl<'a> LocalLearner<'a> {
    pub fn new(ctx: &'a ScoringContext) -> Self {
        Self::with_cap(ctx, DEFAULT_CAP)
    }

    pub fn with_cap(ctx: &'a ScoringContext, cap: usize) -> Self {
        LocalLearner {
            ctx,
            cap,
            learned: HashMap::new(),
            candidates: HashMap::new(),
            neighbors: HashMap::new(),
            raw_spouses: HashMap::new(),
            spouses: HashMap::new(),
        }
    }

    pub fn ctx(&self) -> &'a ScoringContext {
        self.ctx
    }

    /// Number of distinct variable sets searched so far.
    pub fn searches(&self) -> usize {
        self.learned.len()
    }

    pub fn learn(&mut self, vars: &BTreeSet<usize>) -> Result<&LocalGraph> {
        let key: Vec<usize> = vars.iter().copied().collect();
        if !self.learned.contains_key(&key) {
            let g = learn_local_dag_capped(self.ctx, &key, self.cap)?;
            self.learned.insert(key.clone(), g);
        }
        Ok(&self.learned[&key])
    }

    /// Candidates in name order.
    fn by_name(&self) -> Vec<usize> {
        let mut all: Vec<usize> = (0..self.ctx.width()).collect();
        all.sort_by(|&a, &b| self.ctx.name(a).cmp(self.ctx.name(b)));
        all
    }

    /// Grow-and-replace candidate set of `t`: each candidate is tried with
    /// the current set, which is then replaced by the neighbours of `t` in
    /// the learned structure. Repeated until a full pass changes nothing.
    pub fn candidate_neighbors(&mut self, t: usize) -> Result<BTreeSet<usize>> {
        if let Some(c) = self.candidates.get(&t) {
            return Ok(c.clone());
        }
        let order = self.by_name();
        let mut z: BTreeSet<usize> = BTreeSet::new();
        for _ in 0..MAX_PASSES {
            let before = z.clone();
            for &v in &order {
                if v == t || z.contains(&v) {
                    continue;
                }
                let mut vars = z.clone();
                vars.insert(t);
                vars.insert(v);
                z = self.learn(&vars)?.neighbors(t).into_iter().collect();
            }
            if z == before {
                break;
            }
        }
        self.candidates.insert(t, z.clone());
        Ok(z)
    }

    /// Symmetry-corrected neighbours of `t` with parent / child split read
    /// from a structure learned over `t` and its neighbours.
    pub fn find_neighbors(&mut self, t: usize) -> Result<LocalStructure> {
        if let Some(s) = self.neighbors.get(&t) {
            return Ok(s.clone());
        }
        let cand = self.candidate_neighbors(t)?;
        let mut h_star = BTreeSet::new();
        for v in cand {
            if self.candidate_neighbors(v)?.contains(&t) {
                h_star.insert(v);
            }
        }
        let mut vars = h_star.clone();
        vars.insert(t);
        let g = self.learn(&vars)?;
        let pa = h_star.iter().copied().filter(|&v| g.directed(v, t)).collect();
        let ch = h_star.iter().copied().filter(|&v| g.directed(t, v)).collect();
        let s = LocalStructure {
            target: t,
            h_star,
            pa,
            ch,
            s_star: BTreeMap::new(),
        };
        self.neighbors.insert(t, s.clone());
        Ok(s)
    }

    /// One-sided spouse search: `v` qualifies with witness `c` when a
    /// structure over `{q, c, v} + H*(q)` contains `q -> c <- v` with `q`
    /// and `v` nonadjacent.
    fn spouses_one_sided(&mut self, q: usize) -> Result<BTreeMap<usize, usize>> {
        if let Some(s) = self.raw_spouses.get(&q) {
            return Ok(s.clone());
        }
        let hq = self.find_neighbors(q)?.h_star;
        let mut found = BTreeMap::new();
        for &c in &hq {
            let hc = self.find_neighbors(c)?.h_star;
            for &v in &hc {
                if v == q || hq.contains(&v) || found.contains_key(&v) {
                    continue;
                }
                let mut vars = hq.clone();
                vars.extend([q, c, v]);
                let g = self.learn(&vars)?;
                if g.directed(q, c) && g.directed(v, c) && !g.adjacent(q, v) {
                    found.insert(v, c);
                }
            }
        }
        self.raw_spouses.insert(q, found.clone());
        Ok(found)
    }

    /// Spouses of `q` with witnesses, kept only when `q` is in turn found as
    /// a spouse of each of them.
    pub fn find_spouses(&mut self, q: usize) -> Result<BTreeMap<usize, usize>> {
        if let Some(s) = self.spouses.get(&q) {
            return Ok(s.clone());
        }
        let raw = self.spouses_one_sided(q)?;
        let mut kept = BTreeMap::new();
        for (v, c) in raw {
            if self.spouses_one_sided(v)?.contains_key(&q) {
                kept.insert(v, c);
            }
        }
        self.spouses.insert(q, kept.clone());
        Ok(kept)
    }

    /// Neighbours plus spouses. Witness children are moved from `pa` to `ch`.
    pub fn local_structure(&mut self, t: usize) -> Result<LocalStructure> {
        let mut s = self.find_neighbors(t)?;
        s.s_star = self.find_spouses(t)?;
        for &c in s.s_star.values() {
            s.pa.remove(&c);
            s.ch.insert(c);
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayesnet::{forward_sample, BayesNet};

    fn binary_net(parents: Vec<Vec<usize>>, cpts: Vec<Vec<f64>>) -> BayesNet {
        let n = parents.len();
        let names = (0..n).map(|i| ((b'A' + i as u8) as char).to_string()).collect();
        let states = vec![vec!["0".to_string(), "1".to_string()]; n];
        BayesNet::new(names, states, parents, cpts).unwrap()
    }

    const COPYISH: [f64; 4] = [0.85, 0.15, 0.15, 0.85];

    #[test]
    fn chain_neighbors() {
        // A -> T(B) -> C, plus independent D
        let bn = binary_net(
            vec![vec![], vec![0], vec![1], vec![]],
            vec![vec![0.5, 0.5], COPYISH.to_vec(), COPYISH.to_vec(), vec![0.4, 0.6]],
        );
        let ctx = ScoringContext::new(forward_sample(&bn, 5000, 4));
        let mut l = LocalLearner::new(&ctx);
        let s = l.find_neighbors(1).unwrap();
        assert_eq!(s.h_star, BTreeSet::from([0, 2]));
        assert!(l.find_neighbors(3).unwrap().h_star.is_empty());
        // symmetric by construction
        for v in s.h_star {
            assert!(l.find_neighbors(v).unwrap().h_star.contains(&1));
        }
    }

    #[test]
    fn collider_spouse() {
        // A -> C <- B
        let bn = binary_net(
            vec![vec![], vec![], vec![0, 1]],
            vec![vec![0.5, 0.5], vec![0.5, 0.5], vec![0.9, 0.1, 0.3, 0.7, 0.3, 0.7, 0.1, 0.9]],
        );
        let ctx = ScoringContext::new(forward_sample(&bn, 5000, 5));
        let mut l = LocalLearner::new(&ctx);
        let s = l.local_structure(0).unwrap();
        assert_eq!(s.s_star, BTreeMap::from([(1, 2)]));
        assert_eq!(s.ch, BTreeSet::from([2]));
        assert!(l.find_spouses(2).unwrap().is_empty());
    }

    #[test]
    fn chain_has_no_spouses() {
        let bn = binary_net(
            vec![vec![], vec![0], vec![1]],
            vec![vec![0.5, 0.5], COPYISH.to_vec(), COPYISH.to_vec()],
        );
        let ctx = ScoringContext::new(forward_sample(&bn, 5000, 6));
        let mut l = LocalLearner::new(&ctx);
        for t in 0..3 {
            assert!(l.find_spouses(t).unwrap().is_empty());
        }
    }

    #[test]
    fn one_sided_candidate_is_dropped() {
        let bn = binary_net(
            vec![vec![], vec![0], vec![1]],
            vec![vec![0.5, 0.5], COPYISH.to_vec(), COPYISH.to_vec()],
        );
        let ctx = ScoringContext::new(forward_sample(&bn, 5000, 7));
        let mut l = LocalLearner::new(&ctx);
        assert!(l.candidate_neighbors(1).unwrap().contains(&2));
        // C's own search does not return B
        l.candidates.insert(2, BTreeSet::new());
        assert_eq!(l.find_neighbors(1).unwrap().h_star, BTreeSet::from([0]));
    }
}
