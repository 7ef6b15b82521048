use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eventlog::{format_timestamp, parse_timestamp, Event, EventLog};
use crate::indicators::{TargetSpec, DEFAULT_TARGET};

/// Term of a structural equation: `weight * source`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cause {
    /// An indicator name `A_B`, a latent factor, or the target name.
    pub source: String,
    pub weight: f64,
}

/// Concurrent branches inserted after chain position `after`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParallelSpec {
    pub after: usize,
    pub branches: Vec<String>,
    /// Mean branch duration in seconds.
    pub mean_secs: f64,
}

/// Synthetic turnaround process with a linear structural model over link
/// durations and the target delay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightSpec {
    /// Main chain; the last activity defines the target.
    pub chain: Vec<String>,
    pub parallel: Option<ParallelSpec>,
    /// Probability that an activity is immediately repeated.
    pub self_loops: BTreeMap<String, f64>,
    /// Probability that chain positions `i` and `i + 1` run in swapped order.
    pub swaps: BTreeMap<usize, f64>,
    pub latents: Vec<String>,
    /// Structural equations keyed by indicator name or the target name.
    /// Variables without an entry are pure noise.
    pub equations: BTreeMap<String, Vec<Cause>>,
    /// Median link duration in seconds.
    pub base_secs: f64,
    /// Seconds of delay per unit of the target's structural value.
    pub delay_scale: f64,
    pub scheduled_attribute: String,
    pub target: String,
}

impl FlightSpec {
    /// Link indicator names of consecutive chain activities, with a
    /// parallel block named after its split and join.
    pub fn link_names(&self) -> Vec<String> {
        self.chain.windows(2).map(|w| format!("{}_{}", w[0], w[1])).collect()
    }

    /// Edges of the intended process graph.
    pub fn process_edges(&self) -> BTreeSet<(String, String)> {
        let mut edges = BTreeSet::new();
        for (i, w) in self.chain.windows(2).enumerate() {
            match &self.parallel {
                Some(p) if p.after == i => {
                    for b in &p.branches {
                        edges.insert((w[0].clone(), b.clone()));
                        edges.insert((b.clone(), w[1].clone()));
                    }
                }
                _ => {
                    edges.insert((w[0].clone(), w[1].clone()));
                }
            }
        }
        edges
    }

    pub fn target_spec(&self) -> TargetSpec {
        let mut t = TargetSpec::scheduled(self.chain.last().expect("validated"), &self.scheduled_attribute);
        t.name = self.target.clone();
        t
    }

    pub fn validate(&self) -> Result<()> {
        if self.chain.len() < 2 {
            return Err(Error::invalid("the chain needs at least two activities"));
        }
        let mut seen = BTreeSet::new();
        let branches = self.parallel.iter().flat_map(|p| p.branches.iter());
        for a in self.chain.iter().chain(branches) {
            if a.is_empty() || !seen.insert(a) {
                return Err(Error::invalid(format!("activity `{a}` is empty or repeated")));
            }
        }
        if let Some(p) = &self.parallel {
            if p.after + 1 >= self.chain.len() || p.branches.len() < 2 {
                return Err(Error::invalid("parallel block needs a split, a join and two branches"));
            }
        }
        let links: BTreeSet<String> = self.link_names().into_iter().collect();
        for (k, p) in self.self_loops.iter().map(|(k, p)| (k.as_str(), *p)).chain(self.swaps.values().map(|p| ("swap", *p))) {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("probability for {k} outside [0, 1]")));
            }
        }
        for &i in self.swaps.keys() {
            if i + 1 >= self.chain.len() {
                return Err(Error::invalid(format!("swap position {i} outside the chain")));
            }
        }
        let known = |v: &str| links.contains(v) || self.latents.iter().any(|l| l == v) || v == self.target;
        for (var, causes) in &self.equations {
            if !(links.contains(var) || *var == self.target) {
                return Err(Error::invalid(format!("equation for unknown variable `{var}`")));
            }
            for c in causes {
                if !known(&c.source) || c.source == self.target {
                    return Err(Error::invalid(format!("bad cause `{}` of `{var}`", c.source)));
                }
            }
        }
        self.evaluation_order().map(|_| ())
    }

    /// Variables with equations, causes first.
    fn evaluation_order(&self) -> Result<Vec<String>> {
        let mut done: BTreeSet<String> = self.latents.iter().cloned().collect();
        let mut pending: Vec<String> = self.link_names();
        pending.push(self.target.clone());
        let mut order = Vec::new();
        while !pending.is_empty() {
            let (ready, rest): (Vec<String>, Vec<String>) = pending.into_iter().partition(|v| {
                self.equations
                    .get(v)
                    .is_none_or(|cs| cs.iter().all(|c| done.contains(&c.source)))
            });
            if ready.is_empty() {
                return Err(Error::invalid("structural equations are cyclic"));
            }
            done.extend(ready.iter().cloned());
            order.extend(ready);
            pending = rest;
        }
        Ok(order)
    }

    /// Indicators with a direct effect on the target.
    pub fn direct_causes(&self) -> BTreeSet<String> {
        let links: BTreeSet<String> = self.link_names().into_iter().collect();
        self.equations
            .get(&self.target)
            .map(|cs| cs.iter().filter(|c| links.contains(&c.source)).map(|c| c.source.clone()).collect())
            .unwrap_or_default()
    }

    /// Pairs of observed variables that share a latent factor.
    pub fn confounded_pairs(&self) -> BTreeSet<(String, String)> {
        let mut by_latent: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
        for (var, causes) in &self.equations {
            for c in causes {
                if self.latents.contains(&c.source) {
                    by_latent.entry(&c.source).or_default().insert(var.clone());
                }
            }
        }
        let mut pairs = BTreeSet::new();
        for vars in by_latent.values() {
            for a in vars {
                for b in vars {
                    if a < b {
                        pairs.insert((a.clone(), b.clone()));
                    }
                }
            }
        }
        pairs
    }

    /// Turnaround with a parallel service block, one self-loop, one rare
    /// swap, and the following planted structure:
    /// `ARRIVE_CHOCKON -> DEBOARD_CABINCLEAN`, a latent factor shared by
    /// `DEBOARD_CABINCLEAN` and the delay, `CABINCLEAN_BOARDING` and
    /// `CLOSEDOOR_PUSHBACK` as direct causes of the delay, and
    /// `BOARDING_CLOSEDOOR` as a common effect of `DEBOARD_CABINCLEAN` and
    /// `CABINCLEAN_BOARDING`.
    pub fn turnaround() -> Self {
        let s = |x: &str| x.to_string();
        let cause = |src: &str, weight: f64| Cause {
            source: s(src),
            weight,
        };
        let chain = ["ARRIVE", "CHOCKON", "DEBOARD", "CABINCLEAN", "BOARDING", "CLOSEDOOR", "PUSHBACK", "TAKEOFF"]
            .map(s)
            .to_vec();
        let mut equations = BTreeMap::new();
        equations.insert(
            s("DEBOARD_CABINCLEAN"),
            vec![cause("ARRIVE_CHOCKON", 2.0), cause("CREW", 2.0)],
        );
        equations.insert(
            s("BOARDING_CLOSEDOOR"),
            vec![cause("DEBOARD_CABINCLEAN", 1.0), cause("CABINCLEAN_BOARDING", 1.0)],
        );
        equations.insert(
            s(DEFAULT_TARGET),
            vec![
                cause("CREW", 2.0),
                cause("CABINCLEAN_BOARDING", 1.3),
                cause("CLOSEDOOR_PUSHBACK", 2.0),
            ],
        );
        FlightSpec {
            chain,
            parallel: Some(ParallelSpec {
                after: 1,
                branches: ["FUEL", "CATERING", "WATER", "LAVATORY"].map(s).to_vec(),
                mean_secs: 900.0,
            }),
            self_loops: [(s("BOARDING"), 0.1)].into(),
            swaps: [(3, 0.02)].into(),
            latents: vec![s("CREW")],
            equations,
            base_secs: 420.0,
            delay_scale: 420.0,
            scheduled_attribute: s("SCHEDULED"),
            target: s(DEFAULT_TARGET),
        }
    }

    /// The same process without repeats, swaps or latent structure.
    pub fn noiseless(&self) -> Self {
        FlightSpec {
            self_loops: BTreeMap::new(),
            swaps: BTreeMap::new(),
            ..self.clone()
        }
    }
}

/// Log plus the values the generator used.
#[derive(Debug, Clone)]
pub struct GeneratedLog {
    pub log: EventLog,
    pub direct_causes: BTreeSet<String>,
    pub confounded: BTreeSet<(String, String)>,
    /// Per case, structural level in {-1, 0, 1} of each link, latent and the target.
    pub values: Vec<BTreeMap<String, f64>>,
}

/// Three-level structural values in {-1, 0, 1}: each variable's score is
/// the weighted sum of its causes' levels plus standard normal noise, cut at
/// its empirical terciles so every level has about a third of the cases.
fn sample_levels(spec: &FlightSpec, order: &[String], n: usize, rng: &mut ChaCha8Rng) -> Vec<BTreeMap<String, f64>> {
    let mut values = vec![BTreeMap::new(); n];
    let vars = spec.latents.iter().chain(order);
    for v in vars {
        let causes = spec.equations.get(v).map(Vec::as_slice).unwrap_or_default();
        let scores: Vec<f64> = values
            .iter()
            .map(|val| {
                let noise: f64 = rng.sample(StandardNormal);
                noise + causes.iter().map(|c| c.weight * val[&c.source]).sum::<f64>()
            })
            .collect();
        let mut sorted = scores.clone();
        sorted.sort_by(f64::total_cmp);
        let (lo, hi) = match n {
            0 => (0.0, 0.0),
            _ => (sorted[n / 3], sorted[(2 * n) / 3]),
        };
        for (val, x) in values.iter_mut().zip(scores) {
            let level = if x < lo {
                -1.0
            } else if x < hi {
                0.0
            } else {
                1.0
            };
            val.insert(v.clone(), level);
        }
    }
    values
}

const EPOCH: &str = "2018-07-01T06:00:00";

/// Sample `n_cases` turnarounds. Deterministic in `seed`.
pub fn generate_flight_log(spec: &FlightSpec, n_cases: usize, seed: u64) -> Result<GeneratedLog> {
    spec.validate()?;
    let order = spec.evaluation_order()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let epoch = parse_timestamp(EPOCH).expect("constant parses");
    let values = sample_levels(spec, &order, n_cases, &mut rng);
    let mut events = Vec::new();
    for (case_no, val) in values.iter().enumerate() {
        let case = format!("F{case_no:05}");
        // Non-overlapping ranges per level, so tercile binning recovers the level.
        let gap = |name: &str, rng: &mut ChaCha8Rng| -> i64 {
            let jitter: f64 = rng.random_range(-0.15..0.15);
            (spec.base_secs * (1.0 + 0.6 * (val[name] + 1.0 + jitter))).round() as i64
        };

        // activity -> (start, end), in chain order
        let mut t = epoch + case_no as i64 * 3600;
        let mut timeline: Vec<(String, i64, i64)> = Vec::new();
        for (i, act) in spec.chain.iter().enumerate() {
            let service = rng.random_range(60..180);
            timeline.push((act.clone(), t, t + service));
            t += service;
            if let Some(p) = spec.self_loops.get(act) {
                if rng.random::<f64>() < *p {
                    let again = rng.random_range(30..90);
                    timeline.push((act.clone(), t + 1, t + 1 + again));
                    t += 1 + again;
                }
            }
            if i + 1 == spec.chain.len() {
                break;
            }
            let link = format!("{}_{}", act, spec.chain[i + 1]);
            match &spec.parallel {
                Some(p) if p.after == i => {
                    let mut ends = Vec::new();
                    let mut starts: Vec<i64> = (0..p.branches.len()).map(|k| 5 + 10 * k as i64).collect();
                    starts.shuffle(&mut rng);
                    for (b, off) in p.branches.iter().zip(starts) {
                        let d = (p.mean_secs * (0.3 * rng.sample::<f64, _>(StandardNormal)).exp()).round() as i64;
                        let d = d.max(off + 1);
                        timeline.push((b.clone(), t + off, t + d));
                        ends.push(t + d);
                    }
                    let block_end = ends.into_iter().max().unwrap_or(t);
                    t = block_end + gap(&link, &mut rng);
                }
                _ => t += gap(&link, &mut rng),
            }
        }
        for (&i, &p) in &spec.swaps {
            if rng.random::<f64>() < p {
                let (a, b) = (&spec.chain[i], &spec.chain[i + 1]);
                for e in &mut timeline {
                    if e.0 == *a {
                        e.0 = b.clone();
                    } else if e.0 == *b {
                        e.0 = a.clone();
                    }
                }
            }
        }
        let takeoff = spec.chain.last().expect("validated");
        let jitter: f64 = rng.random_range(-0.15..0.15);
        let delay = (spec.delay_scale * (val[&spec.target] + jitter)).round() as i64;
        for (act, s, e) in timeline {
            let mut ev = Event::new(&case, &act, s, e);
            if &act == takeoff {
                ev.extras.insert(spec.scheduled_attribute.clone(), format_timestamp(s - delay));
            }
            events.push(ev);
        }
    }
    Ok(GeneratedLog {
        log: EventLog::from_events(events),
        direct_causes: spec.direct_causes(),
        confounded: spec.confounded_pairs(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eventlog::directly_follows_counts;
    use crate::fuzzymine::{mine, MiningConfig};

    #[test]
    fn noiseless_log_mines_to_spec_graph() {
        let spec = FlightSpec::turnaround().noiseless();
        let g = generate_flight_log(&spec, 400, 1).unwrap();
        let (model, _) = mine(&g.log, &MiningConfig::default()).unwrap();
        let edges: BTreeSet<(String, String)> = model.edges.keys().cloned().collect();
        assert_eq!(edges, spec.process_edges());
    }

    #[test]
    fn self_loops_and_swaps_appear_before_resolution() {
        let spec = FlightSpec::turnaround();
        let g = generate_flight_log(&spec, 600, 2).unwrap();
        let df = directly_follows_counts(&g.log);
        assert!(df.contains_key(&("BOARDING".to_string(), "BOARDING".to_string())));
        assert!(df.contains_key(&("BOARDING".to_string(), "CABINCLEAN".to_string())));
        let (model, report) = mine(&g.log, &MiningConfig::default()).unwrap();
        assert_eq!(report.unary_resolved, ["BOARDING"]);
        assert!(!model.has_edge("BOARDING", "CABINCLEAN"));
        assert!(!model.has_edge("DEBOARD", "BOARDING"));
    }

    #[test]
    fn deterministic_and_validated() {
        let spec = FlightSpec::turnaround();
        let a = generate_flight_log(&spec, 50, 3).unwrap();
        let b = generate_flight_log(&spec, 50, 3).unwrap();
        assert_eq!(a.log, b.log);
        assert_eq!(
            a.direct_causes,
            ["CABINCLEAN_BOARDING", "CLOSEDOOR_PUSHBACK"].map(String::from).into()
        );
        assert_eq!(
            a.confounded,
            [("DEBOARD_CABINCLEAN".to_string(), DEFAULT_TARGET.to_string())].into()
        );
        let mut bad = spec.clone();
        bad.equations.insert("ARRIVE_CHOCKON".into(), vec![Cause { source: "DEBOARD_CABINCLEAN".into(), weight: 1.0 }]);
        assert!(generate_flight_log(&bad, 5, 0).is_err());
    }
}
