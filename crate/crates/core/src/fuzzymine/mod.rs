//! Directly-follows process models and their simplification.
//!
//! The pipeline run by [`mine`] is: initial model from directly-follows
//! counts, binary conflict resolution, N-ary (cycle) conflict resolution,
//! unary (self-loop) resolution through virtual nodes, then edge filtering.

mod conflict;
mod dot;
mod filter;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eventlog::{directly_follows_counts, EventLog};

pub use conflict::{
    classify_binary, nary_relative_importance, resolve_binary, resolve_nary, resolve_unary,
    simple_cycles, BinaryDecision, ConflictReport, NaryAction, NaryResolution,
};
pub use dot::export_dot;
pub use filter::filter_edges;

pub type Edge = (String, String);

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ProcessModel {
    pub nodes: BTreeSet<String>,
    /// Significance of each directed edge. Always strictly positive.
    pub edges: BTreeMap<Edge, f64>,
    /// Virtual node name -> the activity whose self-loop it replaces.
    pub virtual_nodes: BTreeMap<String, String>,
    /// Binary loops preserved during conflict resolution, stored as
    /// (dominant direction source, target). The reverse edge also exists.
    pub kept_loops: BTreeSet<Edge>,
}

impl ProcessModel {
    pub fn sig(&self, a: &str, b: &str) -> f64 {
        self.edges
            .get(&(a.to_string(), b.to_string()))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        self.sig(a, b) > 0.0
    }

    pub fn out_sum(&self, a: &str) -> f64 {
        self.edges
            .iter()
            .filter(|((s, _), _)| s == a)
            .map(|(_, w)| *w)
            .sum()
    }

    pub fn in_sum(&self, b: &str) -> f64 {
        self.edges
            .iter()
            .filter(|((_, t), _)| t == b)
            .map(|(_, w)| *w)
            .sum()
    }

    pub fn successors<'a>(&'a self, a: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .keys()
            .filter(move |(s, _)| s == a)
            .map(|(_, t)| t.as_str())
    }

    pub fn predecessors<'a>(&'a self, b: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .keys()
            .filter(move |(_, t)| t == b)
            .map(|(s, _)| s.as_str())
    }

    pub fn is_virtual(&self, node: &str) -> bool {
        self.virtual_nodes.contains_key(node)
    }

    /// Edges between real activities, excluding self-loops and the weaker
    /// direction of every preserved binary loop. This is the graph that must
    /// be acyclic after conflict resolution.
    pub fn ordering_edges(&self) -> Vec<Edge> {
        self.edges
            .keys()
            .filter(|(a, b)| a != b && !self.is_virtual(a) && !self.is_virtual(b))
            .filter(|(a, b)| !self.kept_loops.contains(&(b.clone(), a.clone())))
            .cloned()
            .collect()
    }

    /// Edges whose endpoints are both real activities (no virtual nodes).
    pub fn activity_edges(&self) -> impl Iterator<Item = (&Edge, f64)> {
        self.edges
            .iter()
            .filter(|((a, b), _)| !self.is_virtual(a) && !self.is_virtual(b))
            .map(|(e, w)| (e, *w))
    }

    /// JSON with edges as a list, since tuple map keys have no JSON form.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<ProcessModel> {
        let j: ModelJson = serde_json::from_str(s)?;
        let mut m = ProcessModel {
            nodes: j.nodes,
            virtual_nodes: j.virtual_nodes,
            ..Default::default()
        };
        for e in j.edges {
            if !(e.sig > 0.0) {
                return Err(Error::invalid(format!("edge {} -> {} has non-positive significance", e.from, e.to)));
            }
            m.nodes.insert(e.from.clone());
            m.nodes.insert(e.to.clone());
            m.edges.insert((e.from, e.to), e.sig);
        }
        for (a, b) in j.kept_loops {
            if !(m.has_edge(&a, &b) && m.has_edge(&b, &a)) {
                return Err(Error::invalid(format!("kept loop {a} <-> {b} lacks an edge")));
            }
            m.kept_loops.insert((a, b));
        }
        Ok(m)
    }

    pub(crate) fn remove_edge(&mut self, a: &str, b: &str) -> Option<f64> {
        let key = (a.to_string(), b.to_string());
        let removed = self.edges.remove(&key);
        if removed.is_some() {
            let rev = (b.to_string(), a.to_string());
            self.kept_loops.remove(&key);
            self.kept_loops.remove(&rev);
        }
        removed
    }
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    from: String,
    to: String,
    sig: f64,
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    nodes: BTreeSet<String>,
    edges: Vec<EdgeJson>,
    #[serde(default)]
    virtual_nodes: BTreeMap<String, String>,
    #[serde(default)]
    kept_loops: Vec<Edge>,
}

impl From<&ProcessModel> for ModelJson {
    fn from(m: &ProcessModel) -> Self {
        ModelJson {
            nodes: m.nodes.clone(),
            edges: m
                .edges
                .iter()
                .map(|((a, b), &sig)| EdgeJson {
                    from: a.clone(),
                    to: b.clone(),
                    sig,
                })
                .collect(),
            virtual_nodes: m.virtual_nodes.clone(),
            kept_loops: m.kept_loops.iter().cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiningConfig {
    /// Both directions of a binary conflict at or above this relative
    /// importance form a preserved loop.
    pub preserve_threshold: f64,
    /// Offset above which the weaker edge of a binary conflict is removed.
    pub ratio_threshold: f64,
    pub edge_cutoff: f64,
    /// Chain offsets within this tolerance are treated as concurrency.
    pub nary_similarity_eps: f64,
    pub max_cycle_len: usize,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            preserve_threshold: 0.27,
            ratio_threshold: 0.35,
            edge_cutoff: 0.2,
            nary_similarity_eps: 0.05,
            max_cycle_len: 8,
        }
    }
}

impl MiningConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must lie in [0, 1], got {v}")))
            }
        };
        unit("preserve threshold", self.preserve_threshold)?;
        unit("ratio threshold", self.ratio_threshold)?;
        unit("edge cutoff", self.edge_cutoff)?;
        if !(self.nary_similarity_eps > 0.0) {
            return Err(Error::invalid("nary similarity epsilon must be positive"));
        }
        if self.max_cycle_len < 3 {
            return Err(Error::invalid("max cycle length must be at least 3"));
        }
        Ok(())
    }
}

/// One node per activity, one edge per observed directly-follows pair.
pub fn build_initial_model(log: &EventLog) -> Result<ProcessModel> {
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    let edges = directly_follows_counts(log)
        .into_iter()
        .map(|(k, c)| (k, c as f64))
        .collect();
    Ok(ProcessModel {
        nodes: log.activity_universe.clone(),
        edges,
        ..Default::default()
    })
}

/// Relative importance of edge `a -> b`: the mean of its share of `a`'s
/// outgoing significance and of `b`'s incoming significance.
pub fn relative_importance(model: &ProcessModel, a: &str, b: &str) -> Result<f64> {
    let sig = model.sig(a, b);
    if sig <= 0.0 {
        return Err(Error::invalid(format!("no edge {a} -> {b}")));
    }
    let out = model.out_sum(a);
    let inc = model.in_sum(b);
    Ok(0.5 * sig / out + 0.5 * sig / inc)
}

/// Full simplification pipeline.
pub fn mine(log: &EventLog, config: &MiningConfig) -> Result<(ProcessModel, ConflictReport)> {
    config.validate()?;
    let initial = build_initial_model(log)?;
    let mut report = ConflictReport::default();
    let (m, r) = resolve_binary(&initial, config);
    report.merge(r);
    let (m, r) = resolve_nary(&m, config);
    report.merge(r);
    let (m, r) = resolve_unary(&m);
    report.merge(r);
    let m = filter_edges(&m, config);
    Ok((m, report))
}

/// Total order over the real activities consistent with every ordering
/// edge. Ties are broken lexicographically.
pub fn topological_order(model: &ProcessModel) -> Result<Vec<String>> {
    let edges = model.ordering_edges();
    let mut indeg: BTreeMap<&str, usize> = model.nodes.iter().map(|n| (n.as_str(), 0)).collect();
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (a, b) in &edges {
        *indeg.entry(b.as_str()).or_insert(0) += 1;
        indeg.entry(a.as_str()).or_insert(0);
        succ.entry(a.as_str()).or_default().push(b.as_str());
    }
    let mut ready: BTreeSet<&str> = indeg
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(n, _)| *n)
        .collect();
    let mut order = Vec::with_capacity(indeg.len());
    while let Some(n) = ready.pop_first() {
        order.push(n.to_string());
        for &s in succ.get(n).map(Vec::as_slice).unwrap_or(&[]) {
            let d = indeg.get_mut(s).expect("successor registered");
            *d -= 1;
            if *d == 0 {
                ready.insert(s);
            }
        }
    }
    if order.len() < indeg.len() {
        let remaining: BTreeSet<&str> = indeg
            .iter()
            .filter(|(n, _)| !order.iter().any(|o| o == *n))
            .map(|(n, _)| *n)
            .collect();
        return Err(Error::Cycle(find_cycle(&remaining, &succ)));
    }
    Ok(order)
}

/// Walk successors inside `remaining` (every node of which has a successor
/// there) until a node repeats.
fn find_cycle(remaining: &BTreeSet<&str>, succ: &BTreeMap<&str, Vec<&str>>) -> Vec<String> {
    let Some(&start) = remaining.iter().next() else {
        return Vec::new();
    };
    let mut path = vec![start];
    let mut cur = start;
    loop {
        let next = succ
            .get(cur)
            .and_then(|v| v.iter().find(|s| remaining.contains(*s)))
            .copied();
        let Some(next) = next else {
            return path.iter().map(|s| s.to_string()).collect();
        };
        if let Some(pos) = path.iter().position(|p| *p == next) {
            let mut cyc: Vec<String> = path[pos..].iter().map(|s| s.to_string()).collect();
            cyc.push(next.to_string());
            return cyc;
        }
        path.push(next);
        cur = next;
    }
}
