//! Significance-based edge filtering.

use std::collections::BTreeMap;

use super::{MiningConfig, ProcessModel};

/// Keep an edge when its significance, normalised by the strongest edge of
/// the same direction at either endpoint, reaches `edge_cutoff`. The
/// strongest incoming and outgoing edge of every node always survives.
pub fn filter_edges(model: &ProcessModel, config: &MiningConfig) -> ProcessModel {
    let mut max_out: BTreeMap<&str, f64> = BTreeMap::new();
    let mut max_in: BTreeMap<&str, f64> = BTreeMap::new();
    for ((a, b), &w) in &model.edges {
        let o = max_out.entry(a).or_insert(0.0);
        *o = o.max(w);
        let i = max_in.entry(b).or_insert(0.0);
        *i = i.max(w);
    }
    let mut out = model.clone();
    for ((a, b), &w) in &model.edges {
        let util_out = w / max_out[a.as_str()];
        let util_in = w / max_in[b.as_str()];
        if util_out < config.edge_cutoff && util_in < config.edge_cutoff {
            out.remove_edge(a, b);
        }
    }
    out.virtual_nodes
        .retain(|v, owner| out.edges.contains_key(&(owner.clone(), v.clone())));
    out
}
