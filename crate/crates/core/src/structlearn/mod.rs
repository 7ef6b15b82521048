//! BIC scoring, a greedy equivalence search subroutine over small variable
//! sets, and score-based neighbour and spouse discovery with symmetry
//! correction.

mod bic;
mod ges;
mod pdag;
mod sll;

pub use bic::{local_bic_uncached, ScoringContext};
pub use ges::{exact_best_dag, learn_local_dag, learn_local_dag_capped, LocalGraph, DEFAULT_CAP, TIE_EPS};
pub use pdag::Pdag;
pub use sll::{LocalLearner, LocalStructure};

/// Local score of `x` with `parents`, through the context's cache.
pub fn local_bic(ctx: &ScoringContext, x: usize, parents: &[usize]) -> f64 {
    ctx.local_bic(x, parents)
}
