//! Process-mining driven causal discovery under latent confounders.
//!
//! The crate is organised as a pipeline:
//!
//! * [`eventlog`] parses raw event records into case traces.
//! * [`fuzzymine`] builds a directly-follows process model and simplifies it
//!   with unary, binary and N-ary conflict resolution plus edge filtering.
//! * [`indicators`] turns a mined model and a log into per-case link
//!   durations and a target delay column, and discretizes them.
//! * [`bayesnet`] holds discrete Bayesian networks, sampling, separation
//!   oracles and DAG to MAG latent projection.
//! * [`structlearn`] implements BIC scoring, a greedy equivalence search
//!   subroutine and score-based neighbour / spouse discovery.
//! * [`smmb`] assembles the Markov blanket of a target in a maximal
//!   ancestral graph, including district sets.
//! * [`evalharness`] computes precision / recall / F1 and runs the ALARM
//!   experiments and the synthetic flight-log pipeline.
//!
//! Data-parallel inner loops go through [`exec`], which uses rayon when the
//! `parallel` feature is enabled and falls back to sequential iteration
//! otherwise.

pub mod bayesnet;
pub mod error;
pub mod evalharness;
pub mod eventlog;
pub mod exec;
pub mod fuzzymine;
pub mod indicators;
pub mod smmb;
pub mod structlearn;

pub use error::{Error, Result};
