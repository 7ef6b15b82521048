use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::metrics::{score_mb, Metrics, MetricsReport};
use crate::bayesnet::alarm::resolve_in;
use crate::bayesnet::{forward_sample_with, latent_project, true_mag_mb, BayesNet};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::smmb::{smmb, SmmbConfig};
use crate::structlearn::ScoringContext;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Hidden variables; aliases are accepted.
    pub latents: Vec<String>,
    pub sample_size: usize,
    pub repeats: usize,
    pub target: String,
    /// Repeat `i` uses `seeds[i]` if present, otherwise `seed + i`.
    pub seed: u64,
    #[serde(default)]
    pub seeds: Vec<u64>,
    /// Recorded for completeness; the score-based learner runs no tests.
    pub alpha: f64,
    #[serde(default)]
    pub smmb: SmmbConfig,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            latents: Vec::new(),
            sample_size: 2500,
            repeats: 5,
            target: "VTUB".into(),
            seed: 7,
            seeds: Vec::new(),
            alpha: 0.05,
            smmb: SmmbConfig::default(),
            execution: Execution::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn seed_for(&self, repeat: usize) -> u64 {
        self.seeds
            .get(repeat)
            .copied()
            .unwrap_or_else(|| self.seed.wrapping_add(repeat as u64))
    }
}

/// Parse `none`, `INT` or `INT,PMB` style latent lists.
pub fn parse_latents(s: &str) -> Vec<String> {
    let s = s.trim();
    if s.is_empty() || s.eq_ignore_ascii_case("none") {
        return Vec::new();
    }
    s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatResult {
    pub seed: u64,
    pub predicted: Vec<String>,
    pub metrics: Option<Metrics>,
    pub bidirected_edges: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub latents: Vec<String>,
    pub target: String,
    pub truth: Vec<String>,
    pub repeats: Vec<RepeatResult>,
    /// Over repeats that finished without error.
    pub report: MetricsReport,
    pub runtime_secs: f64,
}

impl ExperimentResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Per-data-set rows followed by the mean.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let latents = if self.latents.is_empty() {
            "none".to_string()
        } else {
            self.latents.join(",")
        };
        let _ = writeln!(
            out,
            "target {}  latents {}  n {}  repeats {}",
            self.target,
            latents,
            self.config.sample_size,
            self.repeats.len()
        );
        let _ = writeln!(out, "{:<8} {:>4} {:>4} {:>4} {:>10} {:>10} {:>10}", "data", "MNC", "MNI", "MNF", "precision", "recall", "F1");
        for (i, r) in self.repeats.iter().enumerate() {
            match (&r.metrics, &r.error) {
                (Some(m), _) => {
                    let _ = writeln!(
                        out,
                        "{:<8} {:>4} {:>4} {:>4} {:>10.7} {:>10.7} {:>10.7}",
                        i + 1,
                        m.mnc,
                        m.mni,
                        m.mnf,
                        m.precision,
                        m.recall,
                        m.f1
                    );
                }
                (None, e) => {
                    let _ = writeln!(out, "{:<8} error: {}", i + 1, e.as_deref().unwrap_or("unknown"));
                }
            }
        }
        let r = &self.report;
        let _ = writeln!(
            out,
            "{:<8} {:>4.1} {:>4.1} {:>4.1} {:>10.7} {:>10.7} {:>10.7}",
            "mean", r.mean_mnc, r.mean_mni, r.mean_mnf, r.mean_precision, r.mean_recall, r.mean_f1
        );
        let _ = writeln!(out, "runtime {:.2} s", self.runtime_secs);
        out
    }
}

/// Sample, hide, learn and score each repeat. A failing repeat is recorded
/// with its error and left out of the means.
pub fn run_experiment(net: &BayesNet, config: &ExperimentConfig) -> Result<ExperimentResult> {
    let started = Instant::now();
    if config.sample_size == 0 || config.repeats == 0 {
        return Err(Error::invalid("sample size and repeats must be positive"));
    }
    let latents: Vec<String> = config
        .latents
        .iter()
        .map(|l| resolve_in(net, l))
        .collect::<Result<_>>()?;
    let target = resolve_in(net, &config.target)?;
    if latents.contains(&target) {
        return Err(Error::invalid(format!("target {target} cannot be latent")));
    }
    let mag = latent_project(&net.dag(), &latents)?;
    let truth = true_mag_mb(&mag, &target)?.members();

    let repeats = config.execution.map_range(config.repeats, |i| {
        let seed = config.seed_for(i);
        let run = || -> Result<(BTreeSet<String>, usize)> {
            let data = forward_sample_with(net, config.sample_size, seed, Execution::Sequential)
                .hide_latents(&latents)?;
            let ctx = ScoringContext::new(data);
            let mb = smmb(&ctx, &target, &config.smmb)?;
            Ok((mb.members(), mb.bidirected_count()))
        };
        match run() {
            Ok((predicted, bidirected_edges)) => RepeatResult {
                seed,
                metrics: Some(score_mb(&predicted, &truth)),
                predicted: predicted.into_iter().collect(),
                bidirected_edges,
                error: None,
            },
            Err(e) => RepeatResult {
                seed,
                predicted: Vec::new(),
                metrics: None,
                bidirected_edges: 0,
                error: Some(e.to_string()),
            },
        }
    });
    let report = MetricsReport::from_runs(repeats.iter().filter_map(|r| r.metrics).collect());
    Ok(ExperimentResult {
        config: config.clone(),
        latents,
        target,
        truth: truth.into_iter().collect(),
        repeats,
        report,
        runtime_secs: started.elapsed().as_secs_f64(),
    })
}
