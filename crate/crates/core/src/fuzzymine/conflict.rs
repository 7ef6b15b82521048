//! Unary, binary and N-ary conflict resolution.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{relative_importance, Edge, MiningConfig, ProcessModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinaryDecision {
    /// Both directions are significant: a genuine two-activity loop.
    KeepLoop,
    /// The weaker direction is an exception and is dropped.
    DropWeaker,
    /// Low and balanced: the activities run concurrently, drop both.
    DropBoth,
}

/// Rule table for a pair of conflicting edges with relative importances
/// `rel_ab` and `rel_ba`.
pub fn classify_binary(rel_ab: f64, rel_ba: f64, config: &MiningConfig) -> BinaryDecision {
    if rel_ab >= config.preserve_threshold && rel_ba >= config.preserve_threshold {
        BinaryDecision::KeepLoop
    } else if (rel_ab - rel_ba).abs() > config.ratio_threshold {
        BinaryDecision::DropWeaker
    } else {
        BinaryDecision::DropBoth
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NaryAction {
    Exception,
    Concurrency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaryResolution {
    pub cycle: Vec<String>,
    pub action: NaryAction,
    /// Relative importance of the chain starting at each cycle position.
    pub chain_rel: Vec<f64>,
    /// Offset of each chain from the strongest chain.
    pub offsets: Vec<f64>,
    pub removed: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConflictReport {
    pub binary_kept_loops: Vec<Edge>,
    pub binary_exceptions_removed: Vec<Edge>,
    pub binary_concurrency_removed: Vec<Edge>,
    pub nary_cycles: Vec<NaryResolution>,
    /// Cycles left in place because they exceed the enumeration bound.
    pub nary_unresolved: Vec<Vec<String>>,
    pub unary_resolved: Vec<String>,
}

impl ConflictReport {
    pub fn merge(&mut self, other: ConflictReport) {
        self.binary_kept_loops.extend(other.binary_kept_loops);
        self.binary_exceptions_removed
            .extend(other.binary_exceptions_removed);
        self.binary_concurrency_removed
            .extend(other.binary_concurrency_removed);
        self.nary_cycles.extend(other.nary_cycles);
        self.nary_unresolved.extend(other.nary_unresolved);
        self.unary_resolved.extend(other.unary_resolved);
    }

    /// Every edge removed by binary or N-ary resolution.
    pub fn removed_edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self.binary_exceptions_removed.clone();
        out.extend(self.binary_concurrency_removed.iter().cloned());
        for c in &self.nary_cycles {
            out.extend(c.removed.iter().cloned());
        }
        out
    }
}

/// Resolve every pair `{a -> b, b -> a}`. All decisions are taken on the
/// input model, so the outcome does not depend on pair order.
pub fn resolve_binary(model: &ProcessModel, config: &MiningConfig) -> (ProcessModel, ConflictReport) {
    let mut out = model.clone();
    let mut report = ConflictReport::default();
    let pairs: Vec<Edge> = model
        .edges
        .keys()
        .filter(|(a, b)| a < b && model.has_edge(b, a))
        .cloned()
        .collect();
    for (a, b) in pairs {
        let rab = relative_importance(model, &a, &b).expect("edge present");
        let rba = relative_importance(model, &b, &a).expect("edge present");
        match classify_binary(rab, rba, config) {
            BinaryDecision::KeepLoop => {
                let dominant = if rba > rab {
                    (b.clone(), a.clone())
                } else {
                    (a.clone(), b.clone())
                };
                out.kept_loops.insert(dominant.clone());
                report.binary_kept_loops.push(dominant);
            }
            BinaryDecision::DropWeaker => {
                let weaker = if rab < rba { (a, b) } else { (b, a) };
                out.remove_edge(&weaker.0, &weaker.1);
                report.binary_exceptions_removed.push(weaker);
            }
            BinaryDecision::DropBoth => {
                out.remove_edge(&a, &b);
                out.remove_edge(&b, &a);
                report.binary_concurrency_removed.push((a.clone(), b.clone()));
                report.binary_concurrency_removed.push((b, a));
            }
        }
    }
    (out, report)
}

/// The `n - 1` edges of the chain that starts at `cycle[start]` and walks
/// around the cycle, stopping just before it would return to the start.
fn chain_edges(cycle: &[String], start: usize) -> Vec<(usize, usize)> {
    let n = cycle.len();
    (0..n - 1)
        .map(|k| ((start + k) % n, (start + k + 1) % n))
        .collect()
}

/// Relative importance of the chain over `cycle` that starts at position
/// `start` (0-based). Each of the chain's `N - 1` edges contributes both of
/// its significance ratios weighted by `1 / (2 (N - 1))`, which reduces to
/// the binary relative importance for `N = 2`.
pub fn nary_relative_importance(model: &ProcessModel, cycle: &[String], start: usize) -> Result<f64> {
    let n = cycle.len();
    if n < 3 {
        return Err(Error::invalid(format!(
            "N-ary chains need at least 3 activities, got {n}"
        )));
    }
    if start >= n {
        return Err(Error::invalid(format!("start index {start} outside cycle of length {n}")));
    }
    for k in 0..n {
        let (a, b) = (&cycle[k], &cycle[(k + 1) % n]);
        if !model.has_edge(a, b) {
            return Err(Error::invalid(format!("cycle edge {a} -> {b} missing")));
        }
    }
    let total: f64 = chain_edges(cycle, start)
        .into_iter()
        .map(|(i, j)| relative_importance(model, &cycle[i], &cycle[j]).expect("checked above"))
        .sum();
    Ok(total / (n - 1) as f64)
}

/// Simple directed cycles of length `3..=max_len` over the ordering edges
/// of the model. Each cycle is rotated to start at its smallest activity;
/// output is sorted by length then lexicographically.
pub fn simple_cycles(model: &ProcessModel, max_len: usize) -> Vec<Vec<String>> {
    let edges = model.ordering_edges();
    let nodes: Vec<&str> = {
        let s: BTreeSet<&str> = edges
            .iter()
            .flat_map(|(a, b)| [a.as_str(), b.as_str()])
            .collect();
        s.into_iter().collect()
    };
    let idx = |s: &str| nodes.binary_search(&s).expect("node listed");
    let mut succ = vec![Vec::new(); nodes.len()];
    for (a, b) in &edges {
        succ[idx(a)].push(idx(b));
    }
    for s in &mut succ {
        s.sort_unstable();
    }
    let mut cycles = Vec::new();
    let mut path = Vec::new();
    let mut on_path = vec![false; nodes.len()];
    for start in 0..nodes.len() {
        path.push(start);
        on_path[start] = true;
        extend_cycles(start, &succ, max_len, &mut path, &mut on_path, &mut cycles);
        on_path[start] = false;
        path.pop();
    }
    let mut named: Vec<Vec<String>> = cycles
        .into_iter()
        .map(|c: Vec<usize>| c.into_iter().map(|i| nodes[i].to_string()).collect())
        .collect();
    named.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    named
}

fn extend_cycles(
    start: usize,
    succ: &[Vec<usize>],
    max_len: usize,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<Vec<usize>>,
) {
    let cur = *path.last().expect("non-empty path");
    for &next in &succ[cur] {
        if next == start {
            if path.len() >= 3 {
                out.push(path.clone());
            }
        } else if next > start && !on_path[next] && path.len() < max_len {
            path.push(next);
            on_path[next] = true;
            extend_cycles(start, succ, max_len, path, on_path, out);
            on_path[next] = false;
            path.pop();
        }
    }
}

const TIE_EPS: f64 = 1e-9;

fn resolve_cycle(model: &ProcessModel, cycle: &[String], config: &MiningConfig) -> NaryResolution {
    let n = cycle.len();
    let chain_rel: Vec<f64> = (0..n)
        .map(|i| nary_relative_importance(model, cycle, i).expect("enumerated cycle"))
        .collect();
    let best = chain_rel.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let offsets: Vec<f64> = chain_rel.iter().map(|r| (best - r).abs()).collect();
    let max_offset = offsets.iter().copied().fold(0.0, f64::max);
    let edge = |(i, j): (usize, usize)| (cycle[i].clone(), cycle[j].clone());

    let (action, removed) = if max_offset > config.nary_similarity_eps {
        // weakest chain; first one on ties
        let m = offsets
            .iter()
            .position(|o| *o == max_offset)
            .expect("max is attained");
        let weakest_edge = chain_edges(cycle, m)
            .into_iter()
            .map(|e| {
                let r = relative_importance(model, &cycle[e.0], &cycle[e.1]).expect("cycle edge");
                (e, r)
            })
            .fold(None::<((usize, usize), f64)>, |acc, (e, r)| match acc {
                Some((_, br)) if br <= r => acc,
                _ => Some((e, r)),
            })
            .expect("chain has edges")
            .0;
        (NaryAction::Exception, vec![edge(weakest_edge)])
    } else {
        // Keep only the edges shared by every chain attaining the maximum.
        let leading: Vec<usize> = (0..n).filter(|&i| best - chain_rel[i] <= TIE_EPS).collect();
        let removed = (0..n)
            .map(|k| (k, (k + 1) % n))
            .filter(|e| {
                !leading
                    .iter()
                    .all(|&i| chain_edges(cycle, i).contains(e))
            })
            .map(edge)
            .collect();
        (NaryAction::Concurrency, removed)
    };
    NaryResolution {
        cycle: cycle.to_vec(),
        action,
        chain_rel,
        offsets,
        removed,
    }
}

/// Break every cycle of length `3..=max_cycle_len`, shortest first. Cycles
/// are never preserved. Relative importances are recomputed after each
/// resolution.
pub fn resolve_nary(model: &ProcessModel, config: &MiningConfig) -> (ProcessModel, ConflictReport) {
    let mut out = model.clone();
    let mut report = ConflictReport::default();
    loop {
        let cycles = simple_cycles(&out, config.max_cycle_len);
        let Some(cycle) = cycles.into_iter().next() else {
            break;
        };
        let res = resolve_cycle(&out, &cycle, config);
        for (a, b) in &res.removed {
            out.remove_edge(a, b);
        }
        report.nary_cycles.push(res);
    }
    if let Err(Error::Cycle(c)) = super::topological_order(&out) {
        report.nary_unresolved.push(c);
    }
    (out, report)
}

fn fresh_virtual_name(model: &ProcessModel, base: &str) -> String {
    (1..)
        .map(|k| format!("{base}{k}"))
        .find(|n| !model.nodes.contains(n) && !model.virtual_nodes.contains_key(n))
        .expect("unbounded suffixes")
}

/// Replace every self-loop `a -> a` by an edge to a fresh virtual node
/// `a -> a1` carrying the same significance.
pub fn resolve_unary(model: &ProcessModel) -> (ProcessModel, ConflictReport) {
    let mut out = model.clone();
    let mut report = ConflictReport::default();
    let loops: Vec<(String, f64)> = model
        .edges
        .iter()
        .filter(|((a, b), _)| a == b)
        .map(|((a, _), w)| (a.clone(), *w))
        .collect();
    for (a, w) in loops {
        let name = fresh_virtual_name(&out, &a);
        out.edges.remove(&(a.clone(), a.clone()));
        out.edges.insert((a.clone(), name.clone()), w);
        out.virtual_nodes.insert(name, a.clone());
        report.unary_resolved.push(a);
    }
    (out, report)
}
