//! Markov blanket of a target in a maximal ancestral graph: neighbours,
//! spouses, district sets and their parents, assembled from score-based
//! local searches.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structlearn::{LocalLearner, ScoringContext, DEFAULT_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Directed,
    Bidirected,
    Undirected,
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// Edge of the local graph. For `Directed` the arrow points `from -> to`;
/// the other kinds are symmetric and stored with `from < to`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MbEdge {
    pub from: String,
    pub to: String,
    pub kind: EdgeKind,
    /// Directed edge pointing against the process order.
    #[serde(default, skip_serializing_if = "is_false")]
    pub order_conflict: bool,
}

impl MbEdge {
    pub fn new(from: impl Into<String>, to: impl Into<String>, kind: EdgeKind) -> Self {
        let (mut from, mut to) = (from.into(), to.into());
        if kind != EdgeKind::Directed && to < from {
            std::mem::swap(&mut from, &mut to);
        }
        MbEdge {
            from,
            to,
            kind,
            order_conflict: false,
        }
    }

    pub fn joins(&self, a: &str, b: &str) -> bool {
        (self.from == a && self.to == b) || (self.from == b && self.to == a)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkovBlanket {
    pub target: String,
    pub pa: BTreeSet<String>,
    pub ch: BTreeSet<String>,
    pub sp: BTreeSet<String>,
    pub dis: BTreeSet<String>,
    pub pa_dis: BTreeSet<String>,
    pub dis_ch: BTreeSet<String>,
    pub pa_dis_ch: BTreeSet<String>,
    pub edges: Vec<MbEdge>,
}

impl MarkovBlanket {
    pub fn new(target: impl Into<String>) -> Self {
        MarkovBlanket {
            target: target.into(),
            ..Default::default()
        }
    }

    fn sets_mut(&mut self) -> [&mut BTreeSet<String>; 7] {
        [
            &mut self.pa,
            &mut self.ch,
            &mut self.sp,
            &mut self.dis,
            &mut self.pa_dis,
            &mut self.dis_ch,
            &mut self.pa_dis_ch,
        ]
    }

    pub fn sets(&self) -> [(&'static str, &BTreeSet<String>); 7] {
        [
            ("pa", &self.pa),
            ("ch", &self.ch),
            ("sp", &self.sp),
            ("dis", &self.dis),
            ("pa_dis", &self.pa_dis),
            ("dis_ch", &self.dis_ch),
            ("pa_dis_ch", &self.pa_dis_ch),
        ]
    }

    /// Remove the target everywhere and keep each name only in the first
    /// set of `pa, ch, sp, dis, pa_dis, dis_ch, pa_dis_ch`. Edges are sorted
    /// and deduplicated.
    pub fn canonicalize(&mut self) {
        let target = self.target.clone();
        let mut seen = BTreeSet::from([target]);
        for set in self.sets_mut() {
            set.retain(|v| !seen.contains(v));
            seen.extend(set.iter().cloned());
        }
        self.edges.sort();
        self.edges.dedup();
    }

    /// Flat union of the seven sets.
    pub fn members(&self) -> BTreeSet<String> {
        self.sets().into_iter().flat_map(|(_, s)| s.iter().cloned()).collect()
    }

    pub fn bidirected_count(&self) -> usize {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Bidirected).count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Directed edges as arrows, bidirected as double arrows, undirected
    /// without heads.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph blanket {\n");
        let _ = writeln!(out, "  \"{}\" [shape=doublecircle];", self.target);
        for (label, set) in self.sets() {
            for v in set {
                let _ = writeln!(out, "  \"{v}\" [xlabel=\"{label}\"];");
            }
        }
        for e in &self.edges {
            let attr = match (e.kind, e.order_conflict) {
                (EdgeKind::Directed, false) => String::new(),
                (EdgeKind::Directed, true) => " [color=red]".into(),
                (EdgeKind::Bidirected, _) => " [dir=both]".into(),
                (EdgeKind::Undirected, _) => " [dir=none]".into(),
            };
            let _ = writeln!(out, "  \"{}\" -> \"{}\"{attr};", e.from, e.to);
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmmbConfig {
    /// Largest variable set handed to the local search.
    pub cap: usize,
    /// Also add the spouses of each child to the blanket.
    pub child_spouses_in_mb: bool,
}

impl Default for SmmbConfig {
    fn default() -> Self {
        SmmbConfig {
            cap: DEFAULT_CAP,
            child_spouses_in_mb: false,
        }
    }
}

/// Neighbours of `t` that are joined to it by a bidirected edge: `n` is
/// kept when a neighbour of `n` is a spouse of `t` and a spouse of `n` is
/// another neighbour of `t`.
pub fn find_dis(learner: &mut LocalLearner<'_>, t: usize) -> Result<BTreeSet<usize>> {
    let h_t = learner.find_neighbors(t)?.h_star;
    let s_t = learner.find_spouses(t)?;
    let mut dis = BTreeSet::new();
    if h_t.len() < 2 {
        return Ok(dis);
    }
    for &n in &h_t {
        let h_n = learner.find_neighbors(n)?.h_star;
        if !h_n.iter().any(|m| *m != t && s_t.contains_key(m)) {
            continue;
        }
        let s_n = learner.find_spouses(n)?;
        if s_n.keys().any(|m1| *m1 != n && h_t.contains(m1)) {
            dis.insert(n);
        }
    }
    Ok(dis)
}

/// District members reachable from `q` by repeated [`find_dis`], with the
/// bidirected pairs found on the way.
fn district_closure(
    learner: &mut LocalLearner<'_>,
    q: usize,
) -> Result<(BTreeSet<usize>, BTreeSet<(usize, usize)>)> {
    let mut pairs = BTreeSet::new();
    let mut set = find_dis(learner, q)?;
    pairs.extend(set.iter().map(|&n| (q.min(n), q.max(n))));
    loop {
        let size = set.len();
        for m in set.clone() {
            for n in find_dis(learner, m)? {
                pairs.insert((m.min(n), m.max(n)));
                set.insert(n);
            }
        }
        if set.len() == size {
            break;
        }
    }
    set.remove(&q);
    Ok((set, pairs))
}

/// Blanket of the variable named `target`.
pub fn smmb(ctx: &ScoringContext, target: &str, config: &SmmbConfig) -> Result<MarkovBlanket> {
    let t = ctx
        .index_of(target)
        .ok_or_else(|| Error::UnknownVariable(target.to_string()))?;
    let mut learner = LocalLearner::with_cap(ctx, config.cap);
    smmb_with(&mut learner, t, config)
}

pub fn smmb_with(learner: &mut LocalLearner<'_>, t: usize, config: &SmmbConfig) -> Result<MarkovBlanket> {
    let ctx = learner.ctx();
    let name = |i: usize| ctx.name(i).to_string();
    let local = learner.local_structure(t)?;
    let mut mb = MarkovBlanket::new(name(t));

    for &v in &local.h_star {
        if local.ch.contains(&v) {
            mb.ch.insert(name(v));
            mb.edges.push(MbEdge::new(name(t), name(v), EdgeKind::Directed));
        } else if local.pa.contains(&v) {
            mb.pa.insert(name(v));
            mb.edges.push(MbEdge::new(name(v), name(t), EdgeKind::Directed));
        } else {
            mb.pa.insert(name(v));
            mb.edges.push(MbEdge::new(name(t), name(v), EdgeKind::Undirected));
        }
    }
    for (&v, &c) in &local.s_star {
        mb.sp.insert(name(v));
        mb.edges.push(MbEdge::new(name(v), name(c), EdgeKind::Directed));
    }

    let mut bidirected = BTreeSet::new();
    let mut qs = vec![t];
    qs.extend(local.ch.iter().copied());
    for q in qs {
        let (dis, pairs) = district_closure(learner, q)?;
        bidirected.extend(pairs);
        let mut pa_dis = BTreeSet::new();
        for &m in &dis {
            pa_dis.extend(learner.find_neighbors(m)?.pa);
        }
        let names = |s: &BTreeSet<usize>| s.iter().map(|&i| name(i)).collect::<BTreeSet<_>>();
        if q == t {
            mb.dis.extend(names(&dis));
            mb.pa_dis.extend(names(&pa_dis));
        } else {
            mb.dis_ch.extend(names(&dis));
            mb.pa_dis_ch.extend(names(&pa_dis));
            if config.child_spouses_in_mb {
                let sp = learner.find_spouses(q)?;
                mb.sp.extend(sp.keys().map(|&v| name(v)));
            }
        }
    }

    // a neighbour found in the district is joined by a bidirected edge,
    // not a directed one
    let relabel: Vec<String> = mb.dis.iter().cloned().collect();
    for v in &relabel {
        mb.pa.remove(v);
        mb.ch.remove(v);
    }
    for &(a, b) in &bidirected {
        let (a, b) = (name(a), name(b));
        mb.edges.retain(|e| !e.joins(&a, &b));
        mb.edges.push(MbEdge::new(a, b, EdgeKind::Bidirected));
    }
    mb.canonicalize();
    Ok(mb)
}

/// Source activity of an indicator name `A_B`, where both `A` and `B` are
/// activities in `order`.
fn source_activity<'o>(var: &str, order: &'o [String]) -> Option<&'o String> {
    let is_act = |s: &str| order.iter().any(|a| a == s);
    var.match_indices('_').find_map(|(k, _)| {
        let (src, dst) = (&var[..k], &var[k + 1..]);
        (is_act(src) && is_act(dst))
            .then(|| order.iter().find(|a| *a == src))
            .flatten()
    })
}

/// Orient undirected edges along the process order and flag directed edges
/// that contradict it. Bidirected edges are left alone. `extra` maps
/// variables that are not edge indicators (such as the target) to an
/// activity. Returns the adjusted blanket and one warning per variable
/// that could not be placed.
pub fn orient_with_process_order(
    mb: &MarkovBlanket,
    order: &[String],
    extra: &BTreeMap<String, String>,
) -> (MarkovBlanket, Vec<String>) {
    let pos = |act: &str| order.iter().position(|a| a == act);
    let mut warnings = BTreeSet::new();
    let mut place = |var: &str| -> Option<usize> {
        let act = extra
            .get(var)
            .map(String::as_str)
            .or_else(|| source_activity(var, order).map(String::as_str));
        let p = act.and_then(pos);
        if p.is_none() {
            warnings.insert(format!("`{var}` does not map to an activity in the process order"));
        }
        p
    };
    let mut out = mb.clone();
    for e in &mut out.edges {
        if e.kind == EdgeKind::Bidirected {
            continue;
        }
        let (Some(pf), Some(pt)) = (place(&e.from), place(&e.to)) else {
            continue;
        };
        match e.kind {
            EdgeKind::Undirected if pf != pt => {
                if pf > pt {
                    std::mem::swap(&mut e.from, &mut e.to);
                }
                e.kind = EdgeKind::Directed;
            }
            EdgeKind::Directed => e.order_conflict = pf > pt,
            _ => {}
        }
    }
    // keep pa / ch in line with newly oriented edges at the target
    for e in &out.edges {
        if e.kind != EdgeKind::Directed {
            continue;
        }
        if e.to == out.target && out.ch.remove(&e.from) {
            out.pa.insert(e.from.clone());
        } else if e.from == out.target && out.pa.remove(&e.to) {
            out.ch.insert(e.to.clone());
        }
    }
    out.canonicalize();
    (out, warnings.into_iter().collect())
}
