use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::Dag;
use crate::error::{Error, Result};
use crate::smmb::{EdgeKind, MarkovBlanket, MbEdge};

/// Largest `|O| - 2` for which exhaustive subset separation is attempted.
pub const EXHAUSTIVE_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mark {
    Tail,
    Arrow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProjectionMethod {
    /// Test separation only by the observed ancestors of the pair.
    #[default]
    InducingPath,
    /// Try every subset of the remaining observed variables.
    Exhaustive,
}

/// Mixed graph with directed and bidirected edges.
/// `edges[(a, b)]` with `a < b` holds the marks at `a` and at `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mag {
    names: Vec<String>,
    edges: BTreeMap<(usize, usize), (Mark, Mark)>,
    adj: Vec<BTreeSet<usize>>,
}

#[derive(Serialize, Deserialize)]
struct MagJson {
    nodes: Vec<String>,
    edges: Vec<MagEdgeJson>,
}

#[derive(Serialize, Deserialize)]
struct MagEdgeJson {
    a: String,
    b: String,
    mark_a: Mark,
    mark_b: Mark,
}

impl Mag {
    pub fn new(names: Vec<String>) -> Self {
        let n = names.len();
        Mag {
            names,
            edges: BTreeMap::new(),
            adj: vec![BTreeSet::new(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Insert or replace the edge between `a` and `b`.
    pub fn set_edge(&mut self, a: usize, b: usize, mark_a: Mark, mark_b: Mark) {
        assert_ne!(a, b, "self-loops are not allowed");
        let (key, val) = if a < b {
            ((a, b), (mark_a, mark_b))
        } else {
            ((b, a), (mark_b, mark_a))
        };
        self.edges.insert(key, val);
        self.adj[a].insert(b);
        self.adj[b].insert(a);
    }

    pub fn add_directed(&mut self, from: usize, to: usize) {
        self.set_edge(from, to, Mark::Tail, Mark::Arrow);
    }

    pub fn add_bidirected(&mut self, a: usize, b: usize) {
        self.set_edge(a, b, Mark::Arrow, Mark::Arrow);
    }

    /// Marks at `a` and at `b`, if adjacent.
    pub fn marks(&self, a: usize, b: usize) -> Option<(Mark, Mark)> {
        if a < b {
            self.edges.get(&(a, b)).copied()
        } else {
            self.edges.get(&(b, a)).map(|&(x, y)| (y, x))
        }
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    pub fn neighbors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[a].iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// All edges as `(a, b, mark_a, mark_b)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, Mark, Mark)> + '_ {
        self.edges.iter().map(|(&(a, b), &(x, y))| (a, b, x, y))
    }

    pub fn parents(&self, i: usize) -> Vec<usize> {
        self.neighbors(i)
            .filter(|&j| self.marks(j, i) == Some((Mark::Tail, Mark::Arrow)))
            .collect()
    }

    pub fn children(&self, i: usize) -> Vec<usize> {
        self.neighbors(i)
            .filter(|&j| self.marks(i, j) == Some((Mark::Tail, Mark::Arrow)))
            .collect()
    }

    pub fn bidirected_neighbors(&self, i: usize) -> Vec<usize> {
        self.neighbors(i)
            .filter(|&j| self.marks(i, j) == Some((Mark::Arrow, Mark::Arrow)))
            .collect()
    }

    /// Nodes reachable from `i` through bidirected edges only, `i` excluded.
    pub fn district(&self, i: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([i]);
        let mut stack = vec![i];
        while let Some(v) = stack.pop() {
            for w in self.bidirected_neighbors(v) {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen.remove(&i);
        seen
    }

    /// Mask of the ancestors of `seeds` along directed edges, seeds included.
    pub fn ancestors_of(&self, seeds: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.len()];
        let mut stack = seeds.to_vec();
        while let Some(v) = stack.pop() {
            if !mask[v] {
                mask[v] = true;
                stack.extend(self.parents(v));
            }
        }
        mask
    }

    /// No directed cycle and no bidirected edge between a node and one of
    /// its ancestors. Undirected (tail-tail) edges are rejected.
    pub fn validate(&self) -> Result<()> {
        for (a, b, x, y) in self.edges() {
            match (x, y) {
                (Mark::Tail, Mark::Tail) => {
                    return Err(Error::invalid(format!(
                        "undirected edge {} - {}",
                        self.names[a], self.names[b]
                    )))
                }
                (Mark::Tail, Mark::Arrow) | (Mark::Arrow, Mark::Tail) => {
                    let (from, to) = if x == Mark::Tail { (a, b) } else { (b, a) };
                    if self.ancestors_of(&[from])[to] {
                        return Err(Error::invalid(format!(
                            "directed cycle through {} -> {}",
                            self.names[from], self.names[to]
                        )));
                    }
                }
                (Mark::Arrow, Mark::Arrow) => {
                    if self.ancestors_of(&[a])[b] || self.ancestors_of(&[b])[a] {
                        return Err(Error::invalid(format!(
                            "almost directed cycle through {} <-> {}",
                            self.names[a], self.names[b]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Every nonadjacent pair is m-separated by some subset of the other nodes.
    /// Exhaustive up to [`EXHAUSTIVE_LIMIT`] candidate nodes.
    pub fn is_maximal(&self) -> Result<bool> {
        let n = self.len();
        if n.saturating_sub(2) > EXHAUSTIVE_LIMIT {
            return Err(Error::Capability(format!(
                "maximality check over {n} nodes exceeds the exhaustive limit"
            )));
        }
        for a in 0..n {
            for b in a + 1..n {
                if self.adjacent(a, b) {
                    continue;
                }
                let others: Vec<usize> = (0..n).filter(|&v| v != a && v != b).collect();
                let separable =
                    subsets(&others).any(|z| self.m_separated(a, b, &z));
                if !separable {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// m-separation of `x` and `y` given `z`, by reachability over
    /// (node, arrowhead-at-node) states.
    pub fn m_separated(&self, x: usize, y: usize, z: &[usize]) -> bool {
        let n = self.len();
        let mut in_z = vec![false; n];
        for &v in z {
            in_z[v] = true;
        }
        let an_z = self.ancestors_of(z);
        let mut visited = vec![[false; 2]; n];
        let mut queue = VecDeque::new();
        for w in self.neighbors(x) {
            let (_, mw) = self.marks(x, w).expect("adjacent");
            queue.push_back((w, mw == Mark::Arrow));
        }
        while let Some((v, head_in)) = queue.pop_front() {
            if visited[v][head_in as usize] {
                continue;
            }
            visited[v][head_in as usize] = true;
            if v == y {
                return false;
            }
            for w in self.neighbors(v) {
                let (mv, mw) = self.marks(v, w).expect("adjacent");
                let collider = head_in && mv == Mark::Arrow;
                let passes = if collider { an_z[v] } else { !in_z[v] };
                if passes {
                    queue.push_back((w, mw == Mark::Arrow));
                }
            }
        }
        true
    }

    pub fn to_json(&self) -> Result<String> {
        let j = MagJson {
            nodes: self.names.clone(),
            edges: self
                .edges()
                .map(|(a, b, x, y)| MagEdgeJson {
                    a: self.names[a].clone(),
                    b: self.names[b].clone(),
                    mark_a: x,
                    mark_b: y,
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&j)?)
    }

    pub fn from_json(s: &str) -> Result<Mag> {
        let j: MagJson = serde_json::from_str(s)?;
        let mut mag = Mag::new(j.nodes);
        for e in j.edges {
            let a = mag.index_of(&e.a).ok_or_else(|| Error::UnknownVariable(e.a.clone()))?;
            let b = mag.index_of(&e.b).ok_or_else(|| Error::UnknownVariable(e.b.clone()))?;
            if a == b {
                return Err(Error::invalid(format!("self-loop on {}", e.a)));
            }
            mag.set_edge(a, b, e.mark_a, e.mark_b);
        }
        Ok(mag)
    }
}

/// All subsets of `items`, smallest first within each bitmask count order.
fn subsets(items: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    (0u64..1 << items.len()).map(move |mask| {
        items
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &v)| v)
            .collect()
    })
}

/// Project `dag` onto the variables not named in `latents`.
pub fn latent_project<S: AsRef<str>>(dag: &Dag, latents: &[S]) -> Result<Mag> {
    latent_project_with(dag, latents, ProjectionMethod::default())
}

pub fn latent_project_with<S: AsRef<str>>(
    dag: &Dag,
    latents: &[S],
    method: ProjectionMethod,
) -> Result<Mag> {
    let mut hidden = vec![false; dag.len()];
    for l in latents {
        let i = dag
            .index_of(l.as_ref())
            .ok_or_else(|| Error::UnknownVariable(l.as_ref().to_string()))?;
        hidden[i] = true;
    }
    let observed: Vec<usize> = (0..dag.len()).filter(|&i| !hidden[i]).collect();
    if observed.is_empty() {
        return Err(Error::invalid("every variable is latent"));
    }
    if method == ProjectionMethod::Exhaustive && observed.len().saturating_sub(2) > EXHAUSTIVE_LIMIT {
        return Err(Error::Capability(format!(
            "exhaustive projection over {} observed variables exceeds the limit of {}",
            observed.len(),
            EXHAUSTIVE_LIMIT + 2
        )));
    }
    let ancestors: Vec<Vec<bool>> = (0..dag.len()).map(|i| dag.ancestors_of(&[i])).collect();
    let names = observed.iter().map(|&i| dag.names()[i].clone()).collect();
    let mut mag = Mag::new(names);
    for (ia, &a) in observed.iter().enumerate() {
        for (ib, &b) in observed.iter().enumerate().skip(ia + 1) {
            let adjacent = match method {
                ProjectionMethod::InducingPath => {
                    let z: Vec<usize> = observed
                        .iter()
                        .copied()
                        .filter(|&v| v != a && v != b && (ancestors[a][v] || ancestors[b][v]))
                        .collect();
                    !dag.d_separated(a, b, &z)
                }
                ProjectionMethod::Exhaustive => {
                    let others: Vec<usize> =
                        observed.iter().copied().filter(|&v| v != a && v != b).collect();
                    let separable = subsets(&others).any(|z| dag.d_separated(a, b, &z));
                    !separable
                }
            };
            if !adjacent {
                continue;
            }
            if ancestors[b][a] {
                mag.add_directed(ia, ib);
            } else if ancestors[a][b] {
                mag.add_directed(ib, ia);
            } else {
                mag.add_bidirected(ia, ib);
            }
        }
    }
    Ok(mag)
}

/// Structural Markov blanket of `target` in `mag`.
pub fn true_mag_mb(mag: &Mag, target: &str) -> Result<MarkovBlanket> {
    let t = mag
        .index_of(target)
        .ok_or_else(|| Error::UnknownVariable(target.to_string()))?;
    let name = |i: usize| mag.names()[i].clone();
    let parents_of = |set: &BTreeSet<usize>| -> BTreeSet<usize> {
        set.iter().flat_map(|&v| mag.parents(v)).collect()
    };

    let pa: BTreeSet<usize> = mag.parents(t).into_iter().collect();
    let ch: BTreeSet<usize> = mag.children(t).into_iter().collect();
    let sp = parents_of(&ch);
    let dis = mag.district(t);
    let pa_dis = parents_of(&dis);
    let dis_ch: BTreeSet<usize> = ch.iter().flat_map(|&c| mag.district(c)).collect();
    let pa_dis_ch = parents_of(&dis_ch);

    let to_names = |s: &BTreeSet<usize>| s.iter().map(|&i| name(i)).collect();
    let mut mb = MarkovBlanket::new(target);
    mb.pa = to_names(&pa);
    mb.ch = to_names(&ch);
    mb.sp = to_names(&sp);
    mb.dis = to_names(&dis);
    mb.pa_dis = to_names(&pa_dis);
    mb.dis_ch = to_names(&dis_ch);
    mb.pa_dis_ch = to_names(&pa_dis_ch);
    mb.canonicalize();

    let mut scope: BTreeSet<usize> = mb.members().iter().filter_map(|n| mag.index_of(n)).collect();
    scope.insert(t);
    for (a, b, x, y) in mag.edges() {
        if !(scope.contains(&a) && scope.contains(&b)) {
            continue;
        }
        let edge = match (x, y) {
            (Mark::Tail, Mark::Arrow) => MbEdge::new(name(a), name(b), EdgeKind::Directed),
            (Mark::Arrow, Mark::Tail) => MbEdge::new(name(b), name(a), EdgeKind::Directed),
            (Mark::Arrow, Mark::Arrow) => MbEdge::new(name(a), name(b), EdgeKind::Bidirected),
            (Mark::Tail, Mark::Tail) => MbEdge::new(name(a), name(b), EdgeKind::Undirected),
        };
        mb.edges.push(edge);
    }
    Ok(mb)
}
