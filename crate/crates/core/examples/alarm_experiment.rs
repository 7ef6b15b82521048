//! Run the ALARM blanket experiment for one latent setting.
//!
//! `cargo run --release --example alarm_experiment -- INT,PMB 5000`

use aclp::bayesnet::alarm::alarm;
use aclp::evalharness::{parse_latents, run_experiment, ExperimentConfig};

fn main() -> aclp::Result<()> {
    let mut args = std::env::args().skip(1);
    let latents = parse_latents(&args.next().unwrap_or_else(|| "none".into()));
    let sample_size = args.next().map_or(Ok(2500), |s| s.parse()).expect("sample size is an integer");
    let config = ExperimentConfig {
        latents,
        sample_size,
        ..Default::default()
    };
    let r = run_experiment(&alarm(), &config)?;
    println!("truth {}", r.truth.join(" "));
    for rep in &r.repeats {
        println!("seed {}: {} ({} bidirected)", rep.seed, rep.predicted.join(" "), rep.bidirected_edges);
    }
    print!("{}", r.to_table());
    Ok(())
}
