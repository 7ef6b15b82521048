//! Blanket recovery metrics, the ALARM experiment runner and a synthetic
//! flight-log generator with known ground truth.

mod experiment;
mod flightgen;
mod metrics;

pub use experiment::{parse_latents, run_experiment, ExperimentConfig, ExperimentResult, RepeatResult};
pub use metrics::{f_measure, score_mb, Metrics, MetricsReport};
pub use flightgen::{generate_flight_log, Cause, FlightSpec, GeneratedLog, ParallelSpec};
