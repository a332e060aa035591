//! Relational boosted bandits.
//!
//! An online contextual bandit learner whose contexts are sets of ground
//! first-order facts. The reward model is a sum of relational regression
//! trees fit by functional gradient boosting; actions are chosen by a softmax
//! over the model's reward probabilities, and each mini-batch is subsampled by
//! stochastic prioritization before the next boosting round.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the experiment
//! runner and the command line live in the companion `rb2` crate.
//!
//! Module map:
//!
//! * [`logic`]: symbols, atoms, substitutions, the indexed [`logic::FactStore`]
//!   and conjunctive query evaluation.
//! * [`tilde`]: mode-directed refinement and greedy induction of relational
//!   regression trees.
//! * [`boosting`]: the additive potential, point-wise gradients and per-batch
//!   stage fitting.
//! * [`sampling`]: informed (prioritized), greedy and uniform buffer sampling.
//! * [`bandit`]: action selection and the online loop with regret accounting.
//! * [`baselines`]: propositionalized LinUCB.
//! * [`distill`]: single-tree distillation of a boosted model.
//! * [`data`]: datasets, the replay environment and a synthetic movie domain.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bandit;
pub mod baselines;
pub mod boosting;
pub mod data;
pub mod distill;
mod error;
pub mod logic;
pub mod math;
pub mod sampling;
pub mod tilde;

pub use error::{Error, Result};

/// Seeded generator used by every randomized routine in the crate.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Builds the crate's generator from a 64-bit seed.
pub fn seeded_rng(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}
