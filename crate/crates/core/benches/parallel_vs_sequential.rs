use aclp::bayesnet::alarm::alarm;
use aclp::bayesnet::forward_sample_with;
use aclp::evalharness::{run_experiment, ExperimentConfig};
use aclp::exec::Execution;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

// Without the `parallel` feature both variants run sequentially.
const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn sampling(c: &mut Criterion) {
    let net = alarm();
    let mut g = c.benchmark_group("forward_sample");
    for (name, mode) in MODES {
        g.bench_with_input(BenchmarkId::new(name, 20_000), &mode, |b, &mode| {
            b.iter(|| forward_sample_with(&net, 20_000, 7, mode))
        });
    }
    g.finish();
}

fn experiment(c: &mut Criterion) {
    let net = alarm();
    let mut g = c.benchmark_group("run_experiment");
    g.sample_size(10);
    for (name, mode) in MODES {
        let config = ExperimentConfig {
            latents: vec!["INT".into()],
            sample_size: 1000,
            repeats: 4,
            execution: mode,
            ..Default::default()
        };
        g.bench_with_input(BenchmarkId::new(name, "INT/1000x4"), &config, |b, config| {
            b.iter(|| run_experiment(&net, config).expect("experiment runs"))
        });
    }
    g.finish();
}

criterion_group!(benches, sampling, experiment);
criterion_main!(benches);
