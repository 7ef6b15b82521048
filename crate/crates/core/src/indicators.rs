//! Per-case link-duration indicators derived from a mined process model, a
//! target delay column, and equal-frequency discretization for scoring.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bayesnet::DataSet;
use crate::error::{Error, Result};
use crate::eventlog::{parse_timestamp, EventLog, Trace};
use crate::fuzzymine::{ConflictReport, NaryAction, ProcessModel};

pub const DEFAULT_TARGET: &str = "FLIGHTDELAY";
pub const DEFAULT_BINS: usize = 3;

/// What the reference time of the target is measured against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetReference {
    /// A timestamp stored in an event attribute of the target activity,
    /// such as a scheduled departure.
    Attribute(String),
    /// The end of the last event of another activity before the target.
    Activity(String),
}

/// Target = start of the first `activity` event minus the reference time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub name: String,
    pub activity: String,
    pub reference: TargetReference,
}

impl TargetSpec {
    pub fn scheduled(activity: &str, attribute: &str) -> Self {
        TargetSpec {
            name: DEFAULT_TARGET.into(),
            activity: activity.into(),
            reference: TargetReference::Attribute(attribute.into()),
        }
    }

    pub fn between(from: &str, to: &str) -> Self {
        TargetSpec {
            name: DEFAULT_TARGET.into(),
            activity: to.into(),
            reference: TargetReference::Activity(from.into()),
        }
    }

    /// Activities whose timestamps define the target.
    pub fn defining_activities(&self) -> Vec<&str> {
        let mut v = vec![self.activity.as_str()];
        if let TargetReference::Activity(a) = &self.reference {
            v.push(a);
        }
        v
    }

    fn value(&self, trace: &Trace) -> Option<f64> {
        let (pos, ev) = trace
            .events
            .iter()
            .enumerate()
            .find(|(_, e)| e.activity == self.activity)?;
        let reference = match &self.reference {
            TargetReference::Attribute(attr) => parse_timestamp(ev.extras.get(attr)?)?,
            TargetReference::Activity(a) => trace.events[..pos]
                .iter()
                .rev()
                .find(|e| &e.activity == a)?
                .t_end,
        };
        Some((ev.t_start - reference) as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndicatorOptions {
    /// Replace the edges of each detected parallel block by one block
    /// variable holding the longest branch.
    pub parallel_blocks: bool,
    /// Drop edges that touch an activity defining the target, which would
    /// otherwise share timestamps with it.
    pub exclude_target_edges: bool,
}

impl Default for IndicatorOptions {
    fn default() -> Self {
        IndicatorOptions {
            parallel_blocks: true,
            exclude_target_edges: true,
        }
    }
}

/// Split activity, concurrent branch activities and join activity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelBlock {
    pub split: String,
    pub branches: Vec<String>,
    pub join: String,
}

impl ParallelBlock {
    pub fn variable(&self) -> String {
        format!("{}_{}", self.split, self.join)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorTable {
    pub variables: Vec<String>,
    pub case_ids: Vec<String>,
    /// `rows[case][variable]`, seconds; `None` if the case lacks the link.
    pub rows: Vec<Vec<Option<f64>>>,
    /// `(case, variable)` cells whose negative duration was clamped to 0.
    pub clamped: Vec<(String, String)>,
    pub blocks: Vec<ParallelBlock>,
}

impl IndicatorTable {
    pub fn column(&self, var: &str) -> Option<Vec<Option<f64>>> {
        let j = self.variables.iter().position(|v| v == var)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["case_id".to_string()];
        header.extend(self.variables.iter().cloned());
        w.write_record(&header)?;
        for (case, row) in self.case_ids.iter().zip(&self.rows) {
            let mut rec = vec![case.clone()];
            rec.extend(row.iter().map(|v| v.map_or(String::new(), |x| x.to_string())));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Pairs of activities whose mutual edges were removed as concurrent.
fn concurrent_pairs(report: &ConflictReport) -> BTreeSet<(String, String)> {
    let mut pairs = BTreeSet::new();
    let mut add = |a: &str, b: &str| {
        pairs.insert((a.to_string(), b.to_string()));
        pairs.insert((b.to_string(), a.to_string()));
    };
    for (a, b) in &report.binary_concurrency_removed {
        add(a, b);
    }
    for r in &report.nary_cycles {
        if r.action == NaryAction::Concurrency {
            for (a, b) in &r.removed {
                add(a, b);
            }
        }
    }
    pairs
}

/// Parallel blocks: a split whose successors include at least two pairwise
/// concurrent activities that all lead to a common join.
pub fn detect_parallel_blocks(model: &ProcessModel, report: &ConflictReport) -> Vec<ParallelBlock> {
    let conc = concurrent_pairs(report);
    let is_conc = |a: &str, b: &str| conc.contains(&(a.to_string(), b.to_string()));
    let mut blocks = Vec::new();
    for split in &model.nodes {
        let succ: Vec<&str> = model.successors(split).filter(|s| !model.is_virtual(s)).collect();
        let mut used = BTreeSet::new();
        for (i, &first) in succ.iter().enumerate() {
            if used.contains(first) {
                continue;
            }
            let mut group = vec![first];
            for &other in &succ[i + 1..] {
                if !used.contains(other) && group.iter().all(|g| is_conc(g, other)) {
                    group.push(other);
                }
            }
            if group.len() < 2 {
                continue;
            }
            let join = model.nodes.iter().find(|j| {
                !group.contains(&j.as_str()) && group.iter().all(|b| model.has_edge(b, j))
            });
            if let Some(join) = join {
                used.extend(group.iter().copied());
                blocks.push(ParallelBlock {
                    split: split.clone(),
                    branches: group.iter().map(|s| s.to_string()).collect(),
                    join: join.clone(),
                });
            }
        }
    }
    blocks
}

/// Duration of link `a -> b` in a trace: start of the first `b` that has an
/// `a` before it, minus the end of the last such `a`.
fn link_duration(trace: &Trace, a: &str, b: &str) -> Option<i64> {
    let mut last_a: Option<i64> = None;
    for e in &trace.events {
        if e.activity == b {
            if let Some(t) = last_a {
                return Some(e.t_start - t);
            }
        }
        if e.activity == a {
            last_a = Some(e.t_end);
        }
    }
    None
}

/// Longest branch of a block: end of each branch's first event after the
/// split, minus the end of the split.
fn block_duration(trace: &Trace, block: &ParallelBlock) -> Option<i64> {
    let split_pos = trace.events.iter().position(|e| e.activity == block.split)?;
    let split_end = trace.events[split_pos].t_end;
    block
        .branches
        .iter()
        .filter_map(|b| {
            trace.events[split_pos + 1..]
                .iter()
                .find(|e| &e.activity == b)
                .map(|e| e.t_end - split_end)
        })
        .max()
}

/// One row per case, one column per retained activity edge (named `A_B`),
/// one per parallel block, and the target last.
pub fn compute_indicators(
    log: &EventLog,
    model: &ProcessModel,
    report: &ConflictReport,
    target: &TargetSpec,
    options: &IndicatorOptions,
) -> Result<IndicatorTable> {
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    let defining = target.defining_activities();
    let touches_target = |a: &str, b: &str| options.exclude_target_edges && (defining.contains(&a) || defining.contains(&b));
    let blocks = if options.parallel_blocks {
        detect_parallel_blocks(model, report)
    } else {
        Vec::new()
    };
    let mut inside: BTreeSet<(String, String)> = BTreeSet::new();
    for bl in &blocks {
        for b in &bl.branches {
            inside.insert((bl.split.clone(), b.clone()));
            inside.insert((b.clone(), bl.join.clone()));
        }
    }

    enum Col<'a> {
        Edge(&'a str, &'a str),
        Block(&'a ParallelBlock),
    }
    let mut cols: Vec<(String, Col)> = Vec::new();
    for ((a, b), _) in model.activity_edges() {
        if model.is_virtual(b) || inside.contains(&(a.clone(), b.clone())) || touches_target(a, b) {
            continue;
        }
        cols.push((format!("{a}_{b}"), Col::Edge(a, b)));
    }
    for bl in &blocks {
        if !touches_target(&bl.split, &bl.join) {
            cols.push((bl.variable(), Col::Block(bl)));
        }
    }
    cols.sort_by(|x, y| x.0.cmp(&y.0));
    if let Some(w) = cols.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::invalid(format!("indicator name `{}` is ambiguous", w[0].0)));
    }
    if cols.iter().any(|(n, _)| *n == target.name) {
        return Err(Error::invalid(format!("target name `{}` collides with an edge", target.name)));
    }

    let mut variables: Vec<String> = cols.iter().map(|(n, _)| n.clone()).collect();
    variables.push(target.name.clone());
    let mut rows = Vec::with_capacity(log.traces.len());
    let mut clamped = Vec::new();
    for trace in &log.traces {
        let mut row: Vec<Option<f64>> = cols
            .iter()
            .map(|(name, col)| {
                let d = match col {
                    Col::Edge(a, b) => link_duration(trace, a, b),
                    Col::Block(bl) => block_duration(trace, bl),
                }?;
                if d < 0 {
                    clamped.push((trace.case_id.clone(), name.clone()));
                }
                Some(d.max(0) as f64)
            })
            .collect();
        row.push(target.value(trace));
        rows.push(row);
    }
    Ok(IndicatorTable {
        variables,
        case_ids: log.traces.iter().map(|t| t.case_id.clone()).collect(),
        rows,
        clamped,
        blocks,
    })
}

/// Bin edges of one variable: value `x` falls in bin
/// `#{b in boundaries : b < x}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinInfo {
    pub boundaries: Vec<f64>,
    pub min: f64,
    pub max: f64,
}

impl BinInfo {
    pub fn bin(&self, x: f64) -> u8 {
        self.boundaries.iter().filter(|&&b| b < x).count() as u8
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteTable {
    pub data: DataSet,
    pub case_ids: Vec<String>,
    pub bins: BTreeMap<String, BinInfo>,
    /// Rows removed because a cell was missing.
    pub dropped_rows: usize,
    pub warnings: Vec<String>,
}

impl DiscreteTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        self.data.write_csv(out)
    }

    /// Bin boundaries and cardinalities as JSON.
    pub fn bins_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            cardinalities: BTreeMap<&'a str, usize>,
            bins: &'a BTreeMap<String, BinInfo>,
            dropped_rows: usize,
        }
        let cardinalities = self
            .data
            .names
            .iter()
            .zip(&self.data.cards)
            .map(|(n, &c)| (n.as_str(), c))
            .collect();
        Ok(serde_json::to_string_pretty(&Sidecar {
            cardinalities,
            bins: &self.bins,
            dropped_rows: self.dropped_rows,
        })?)
    }
}

/// Equal-frequency boundaries for `values`. Cut points that fall inside a
/// run of equal values move to the nearest change of value.
pub fn equal_frequency_bins(values: &[f64], bins: usize) -> BinInfo {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut boundaries: Vec<f64> = Vec::new();
    if n > 0 {
        for k in 1..bins {
            let ideal = (k * n).div_ceil(bins).clamp(1, n.max(2) - 1);
            let is_cut = |j: usize| j >= 1 && j < n && sorted[j - 1] < sorted[j];
            let cut = (0..n).find_map(|d| {
                if is_cut(ideal + d) {
                    Some(ideal + d)
                } else if d <= ideal && is_cut(ideal - d) {
                    Some(ideal - d)
                } else {
                    None
                }
            });
            if let Some(j) = cut {
                let b = (sorted[j - 1] + sorted[j]) / 2.0;
                if !boundaries.contains(&b) {
                    boundaries.push(b);
                }
            }
        }
    }
    boundaries.sort_by(f64::total_cmp);
    BinInfo {
        boundaries,
        min: sorted.first().copied().unwrap_or(0.0),
        max: sorted.last().copied().unwrap_or(0.0),
    }
}

/// Listwise deletion of incomplete rows, then equal-frequency binning of
/// every variable into at most `bins` categories.
pub fn discretize(table: &IndicatorTable, bins: usize) -> Result<DiscreteTable> {
    if bins < 2 {
        return Err(Error::invalid("at least two bins are required"));
    }
    if bins > u8::MAX as usize {
        return Err(Error::invalid("at most 255 bins are supported"));
    }
    let complete: Vec<usize> = (0..table.rows.len())
        .filter(|&r| table.rows[r].iter().all(Option::is_some))
        .collect();
    let mut columns = Vec::with_capacity(table.variables.len());
    let mut cards = Vec::with_capacity(table.variables.len());
    let mut info = BTreeMap::new();
    let mut warnings = Vec::new();
    for (j, var) in table.variables.iter().enumerate() {
        let vals: Vec<f64> = complete.iter().map(|&r| table.rows[r][j].expect("complete row")).collect();
        let b = equal_frequency_bins(&vals, bins);
        let card = b.boundaries.len() + 1;
        if card < bins && !vals.is_empty() {
            warnings.push(format!("{var}: only {card} categories (too few distinct values)"));
        }
        columns.push(vals.iter().map(|&x| b.bin(x)).collect());
        cards.push(card);
        info.insert(var.clone(), b);
    }
    Ok(DiscreteTable {
        data: DataSet::new(table.variables.clone(), cards, columns)?,
        case_ids: complete.iter().map(|&r| table.case_ids[r].clone()).collect(),
        bins: info,
        dropped_rows: table.rows.len() - complete.len(),
        warnings,
    })
}
