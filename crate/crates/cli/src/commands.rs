use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use aclp::bayesnet::alarm::{alarm, resolve_in};
use aclp::bayesnet::{forward_sample, latent_project_with, parse_network, BayesNet, DataSet, ProjectionMethod};
use aclp::evalharness::{generate_flight_log, parse_latents, run_experiment, ExperimentConfig, FlightSpec};
use aclp::eventlog::{parse_log, EventLog, LogFormat};
use aclp::exec::{set_worker_threads, Execution};
use aclp::fuzzymine::{export_dot, mine, topological_order, ConflictReport, MiningConfig, ProcessModel};
use aclp::indicators::{compute_indicators, discretize, IndicatorOptions, TargetSpec};
use aclp::smmb::{orient_with_process_order, smmb, SmmbConfig};
use aclp::structlearn::ScoringContext;
use serde::Serialize;

use crate::cli::*;
use crate::manifest::{now, write_atomic, RunManifest};
use crate::CliError;

/// Collects outputs and inputs for the manifest.
struct Run {
    out_dir: PathBuf,
    manifest: RunManifest,
}

impl Run {
    fn new<A: Serialize>(name: &str, out: &OutArgs, args: &A, seed: Option<u64>) -> Result<Run, CliError> {
        std::fs::create_dir_all(&out.out).map_err(|e| CliError::io(&out.out, e))?;
        Ok(Run {
            out_dir: out.out.clone(),
            manifest: RunManifest {
                subcommand: name.into(),
                argv: std::env::args().collect(),
                inputs: BTreeMap::new(),
                config: serde_json::to_value(args).unwrap_or_default(),
                seed,
                outputs: Vec::new(),
                version: env!("CARGO_PKG_VERSION").into(),
                started: now(),
                finished: 0.0,
                warnings: Vec::new(),
            },
        })
    }

    fn input(&mut self, role: &str, path: &Path) {
        self.manifest.inputs.insert(role.into(), path.display().to_string());
    }

    fn write(&mut self, file: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.out_dir.join(file);
        write_atomic(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.manifest.outputs.push(path.display().to_string());
        Ok(())
    }

    fn warn(&mut self, w: String) {
        eprintln!("warning: {w}");
        self.manifest.warnings.push(w);
    }

    fn finish(mut self) -> Result<(), CliError> {
        self.manifest.finished = now();
        let path = self.out_dir.join(format!("{}.manifest.json", self.manifest.subcommand));
        let json = serde_json::to_string_pretty(&self.manifest).map_err(aclp::Error::from)?;
        write_atomic(&path, json.as_bytes()).map_err(|e| CliError::io(&path, e))
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn load_net(spec: &str, run: &mut Run) -> Result<BayesNet, CliError> {
    if spec.eq_ignore_ascii_case("alarm") {
        run.manifest.inputs.insert("net".into(), "alarm (bundled)".into());
        return Ok(alarm());
    }
    let path = Path::new(spec);
    run.input("net", path);
    Ok(parse_network(&read(path)?)?)
}

fn resolve_latents(net: &BayesNet, list: &str) -> Result<Vec<String>, CliError> {
    Ok(parse_latents(list)
        .iter()
        .map(|l| resolve_in(net, l))
        .collect::<aclp::Result<_>>()?)
}

fn load_log(args: &LogArgs, run: &mut Run) -> Result<EventLog, CliError> {
    if !args.delimiter.is_ascii() {
        return Err(CliError::Usage("--delimiter must be a single ASCII character".into()));
    }
    let format = LogFormat {
        case_col: args.case_col.clone(),
        activity_col: args.activity_col.clone(),
        timestamp_col: args.timestamp_col.clone(),
        resource_col: args.resource_col.clone(),
        lifecycle_col: args.lifecycle_col.clone(),
        delimiter: args.delimiter as u8,
    };
    run.input("log", &args.log);
    let file = std::fs::File::open(&args.log).map_err(|e| CliError::io(&args.log, e))?;
    Ok(parse_log(std::io::BufReader::new(file), &format)?)
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> aclp::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

pub fn sample(a: &SampleArgs) -> Result<(), CliError> {
    let mut run = Run::new("sample", &a.out, a, Some(a.seed))?;
    if a.flight {
        let spec = FlightSpec::turnaround();
        let g = generate_flight_log(&spec, a.n, a.seed)?;
        run.write("flights.csv", &csv_bytes(|b| g.log.write_csv(b))?)?;
        #[derive(Serialize)]
        struct Truth<'a> {
            spec: &'a FlightSpec,
            direct_causes: &'a std::collections::BTreeSet<String>,
            confounded: &'a std::collections::BTreeSet<(String, String)>,
        }
        let truth = Truth {
            spec: &spec,
            direct_causes: &g.direct_causes,
            confounded: &g.confounded,
        };
        let json = serde_json::to_string_pretty(&truth).map_err(aclp::Error::from)?;
        run.write("flights.truth.json", json.as_bytes())?;
        return run.finish();
    }
    let net = load_net(&a.net, &mut run)?;
    let latents = resolve_latents(&net, &a.latents)?;
    let data = forward_sample(&net, a.n, a.seed).hide_latents(&latents)?;
    run.write("data.csv", &csv_bytes(|b| data.write_csv(b))?)?;
    run.finish()
}

pub fn mine_cmd(a: &MineArgs) -> Result<(), CliError> {
    let mut run = Run::new("mine", &a.out, a, None)?;
    let config = MiningConfig {
        preserve_threshold: a.preserve,
        ratio_threshold: a.ratio,
        edge_cutoff: a.cutoff,
        nary_similarity_eps: a.nary_eps,
        max_cycle_len: a.max_cycle_len,
    };
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let log = load_log(&a.log, &mut run)?;
    let (model, report) = mine(&log, &config)?;
    for c in &report.nary_unresolved {
        run.warn(format!("cycle left unresolved: {}", c.join(" -> ")));
    }
    run.write("model.dot", export_dot(&model).as_bytes())?;
    run.write("model.json", model.to_json()?.as_bytes())?;
    let report_json = serde_json::to_string_pretty(&report).map_err(aclp::Error::from)?;
    run.write("report.json", report_json.as_bytes())?;
    print!("{}", summary(&model, &report));
    run.finish()
}

fn summary(model: &ProcessModel, r: &ConflictReport) -> String {
    format!(
        "nodes {}  edges {}\nkept loops {}  binary exceptions {}  binary concurrency {}  n-ary cycles {}  self-loops {}\n",
        model.nodes.len(),
        model.edges.len(),
        r.binary_kept_loops.len(),
        r.binary_exceptions_removed.len(),
        r.binary_concurrency_removed.len(),
        r.nary_cycles.len(),
        r.unary_resolved.len()
    )
}

fn load_model(path: &Path, run: &mut Run) -> Result<ProcessModel, CliError> {
    run.input("model", path);
    Ok(ProcessModel::from_json(&read(path)?)?)
}

pub fn indicators(a: &IndicatorArgs) -> Result<(), CliError> {
    let mut run = Run::new("indicators", &a.out, a, None)?;
    if a.bins < 2 {
        return Err(CliError::Usage("--bins must be at least 2".into()));
    }
    let log = load_log(&a.log, &mut run)?;
    let model = load_model(&a.model, &mut run)?;
    let report = match &a.report {
        Some(p) => {
            run.input("report", p);
            serde_json::from_str(&read(p)?).map_err(aclp::Error::from)?
        }
        None => ConflictReport::default(),
    };
    let mut target = match &a.reference_activity {
        Some(from) => TargetSpec::between(from, &a.target_activity),
        None => TargetSpec::scheduled(&a.target_activity, &a.scheduled_attr),
    };
    target.name = a.target.clone();
    let options = IndicatorOptions {
        parallel_blocks: !a.no_parallel_blocks,
        exclude_target_edges: !a.keep_target_edges,
    };
    let table = compute_indicators(&log, &model, &report, &target, &options)?;
    for (case, var) in &table.clamped {
        run.warn(format!("case {case}: negative {var} clamped to 0"));
    }
    run.write("indicators.csv", &csv_bytes(|b| table.write_csv(b))?)?;
    let d = discretize(&table, a.bins)?;
    for w in &d.warnings {
        run.warn(w.clone());
    }
    if d.dropped_rows > 0 {
        run.warn(format!("{} rows with missing cells dropped", d.dropped_rows));
    }
    run.write("discrete.csv", &csv_bytes(|b| d.write_csv(b))?)?;
    run.write("bins.json", d.bins_json()?.as_bytes())?;
    run.finish()
}

pub fn discover(a: &DiscoverArgs) -> Result<(), CliError> {
    let mut run = Run::new("discover", &a.out, a, None)?;
    let cards: Option<BTreeMap<String, usize>> = match &a.bins {
        Some(p) => {
            run.input("bins", p);
            #[derive(serde::Deserialize)]
            struct Sidecar {
                cardinalities: BTreeMap<String, usize>,
            }
            let s: Sidecar = serde_json::from_str(&read(p)?).map_err(aclp::Error::from)?;
            Some(s.cardinalities)
        }
        None => None,
    };
    run.input("data", &a.data);
    let file = std::fs::File::open(&a.data).map_err(|e| CliError::io(&a.data, e))?;
    let data = DataSet::read_csv(std::io::BufReader::new(file), cards.as_ref())?;
    let ctx = ScoringContext::new(data);
    let cfg = SmmbConfig {
        cap: a.cap,
        child_spouses_in_mb: a.child_spouses,
    };
    let mut mb = smmb(&ctx, &a.target, &cfg)?;
    if let Some(p) = &a.model {
        let model = load_model(p, &mut run)?;
        let order = topological_order(&model)?;
        let extra = BTreeMap::from([(a.target.clone(), a.target_activity.clone())]);
        let (oriented, warnings) = orient_with_process_order(&mb, &order, &extra);
        mb = oriented;
        for w in warnings {
            run.warn(w);
        }
    }
    run.write("mb.json", mb.to_json()?.as_bytes())?;
    run.write("mb.dot", mb.to_dot().as_bytes())?;
    println!("{}: {}", mb.target, mb.members().into_iter().collect::<Vec<_>>().join(", "));
    run.finish()
}

pub fn eval(a: &EvalArgs) -> Result<(), CliError> {
    let mut run = Run::new("eval", &a.out, a, Some(a.seed))?;
    let net = load_net(&a.net, &mut run)?;
    let execution = match a.jobs {
        1 => Execution::Sequential,
        0 => Execution::Parallel,
        n => {
            set_worker_threads(n);
            Execution::Parallel
        }
    };
    let config = ExperimentConfig {
        latents: parse_latents(&a.latents),
        sample_size: a.n,
        repeats: a.repeats,
        target: a.target.clone(),
        seed: a.seed,
        smmb: SmmbConfig {
            cap: a.cap,
            child_spouses_in_mb: a.child_spouses,
        },
        execution,
        ..Default::default()
    };
    let result = run_experiment(&net, &config)?;
    for (i, r) in result.repeats.iter().enumerate() {
        if let Some(e) = &r.error {
            run.warn(format!("repeat {} (seed {}): {e}", i + 1, r.seed));
        }
    }
    // Wall-clock time lives in the manifest so results stay byte-identical.
    let mut value = serde_json::to_value(&result).map_err(aclp::Error::from)?;
    if let Some(obj) = value.as_object_mut() {
        obj.remove("runtime_secs");
    }
    let json = serde_json::to_string_pretty(&value).map_err(aclp::Error::from)?;
    run.write("results.json", json.as_bytes())?;
    let table = result.to_table();
    let stable: String = table.lines().filter(|l| !l.starts_with("runtime")).map(|l| format!("{l}\n")).collect();
    run.write("results.txt", stable.as_bytes())?;
    print!("{table}");
    run.finish()
}

pub fn project(a: &ProjectArgs) -> Result<(), CliError> {
    let mut run = Run::new("project", &a.out, a, None)?;
    let net = load_net(&a.net, &mut run)?;
    let latents = resolve_latents(&net, &a.latents)?;
    let method = match a.method {
        Method::InducingPath => ProjectionMethod::InducingPath,
        Method::Exhaustive => ProjectionMethod::Exhaustive,
    };
    let mag = latent_project_with(&net.dag(), &latents, method)?;
    run.write("mag.json", mag.to_json()?.as_bytes())?;
    println!("{} nodes, {} edges", mag.len(), mag.edge_count());
    run.finish()
}
