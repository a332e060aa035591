use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{build_query, Dataset, Example};
use crate::boosting::LabeledQuery;
use crate::logic::{ConstId, FactStore, GroundAtom, PredId};
use crate::tilde::Language;
use crate::{Error, Result};

/// A fact revealed after round `t` (1-based) of the stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactDelta {
    pub t: usize,
    pub fact: GroundAtom,
}

/// Policy that gathers the cold-start log on the holdout contexts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LoggingPolicy {
    /// Uniform over all arms.
    Uniform,
    /// Uniform over the listed arm indices only.
    Restricted(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoggedInteraction {
    pub context: Vec<ConstId>,
    pub arm: usize,
    pub query: GroundAtom,
    pub reward: bool,
}

/// Replay of a labeled relational dataset as a contextual bandit.
///
/// Rounds are the dataset's examples in a seeded shuffle. The first
/// `holdout` share of the shuffle is reserved for cold-start logging; the rest
/// is the online stream. An arm earns reward 1 iff it is one of the context's
/// correct labels, so the optimal reward of every round is 1.
#[derive(Clone, Debug)]
pub struct BanditEnvironment {
    store: FactStore,
    language: Language,
    target: PredId,
    label_position: usize,
    arms: Vec<ConstId>,
    examples: Vec<Example>,
    logged: Vec<usize>,
    stream: Vec<usize>,
    deltas: Vec<FactDelta>,
    next_delta: usize,
}

pub fn make_environment(
    dataset: &Dataset,
    seed: u64,
    holdout: f64,
    mut deltas: Vec<FactDelta>,
) -> Result<BanditEnvironment> {
    if !(holdout > 0.0 && holdout < 1.0) {
        return Err(Error::Config("holdout fraction must lie in (0, 1)".into()));
    }
    let n = dataset.examples.len();
    if n < 2 {
        return Err(Error::Config("need at least two examples".into()));
    }
    for d in &deltas {
        dataset.store.schema().check_ground(&d.fact)?;
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = crate::seeded_rng(seed ^ 0x5eed_0f_e4_u64);
    order.shuffle(&mut rng);
    let n_logged = (libm::round(holdout * n as f64) as usize).clamp(1, n - 1);
    let stream = order.split_off(n_logged);
    deltas.sort_by_key(|d| d.t);
    Ok(BanditEnvironment {
        store: dataset.store.clone(),
        language: dataset.language.clone(),
        target: dataset.target(),
        label_position: dataset.label_position,
        arms: dataset.arms(),
        examples: dataset.examples.clone(),
        logged: order,
        stream,
        deltas,
        next_delta: 0,
    })
}

impl BanditEnvironment {
    pub fn store(&self) -> &FactStore {
        &self.store
    }

    pub fn language(&self) -> &Language {
        &self.language
    }

    pub fn target(&self) -> PredId {
        self.target
    }

    pub fn arms(&self) -> &[ConstId] {
        &self.arms
    }

    pub fn num_rounds(&self) -> usize {
        self.stream.len()
    }

    pub fn num_logged(&self) -> usize {
        self.logged.len()
    }

    /// Context of stream round `t` (0-based).
    pub fn context(&self, t: usize) -> &[ConstId] {
        &self.examples[self.stream[t]].context
    }

    /// Dataset index of the example replayed at round `t`.
    pub fn example_index(&self, t: usize) -> usize {
        self.stream[t]
    }

    pub fn query(&self, context: &[ConstId], arm: usize) -> GroundAtom {
        build_query(self.target, self.label_position, context, self.arms[arm])
    }

    /// Reward of `arm` at stream round `t`.
    pub fn reward(&self, t: usize, arm: usize) -> bool {
        self.examples[self.stream[t]].labels.contains(&self.arms[arm])
    }

    /// Contexts replayed in the stream, in order.
    pub fn stream_contexts(&self) -> impl Iterator<Item = &[ConstId]> + '_ {
        self.stream.iter().map(|&i| self.examples[i].context.as_slice())
    }

    pub fn logged_contexts(&self) -> impl Iterator<Item = &[ConstId]> + '_ {
        self.logged.iter().map(|&i| self.examples[i].context.as_slice())
    }

    /// Reveals every pending fact delta with `t' <= t`; returns how many new
    /// facts were added.
    pub fn apply_updates(&mut self, t: usize) -> Result<usize> {
        let start = self.next_delta;
        while self.next_delta < self.deltas.len() && self.deltas[self.next_delta].t <= t {
            self.next_delta += 1;
        }
        let facts = self.deltas[start..self.next_delta].iter().map(|d| d.fact.clone());
        self.store.add_facts(facts)
    }

    /// Plays `policy` once on every holdout context.
    pub fn log_cold_start<R: Rng + ?Sized>(
        &self,
        policy: &LoggingPolicy,
        rng: &mut R,
    ) -> Result<Vec<LoggedInteraction>> {
        let allowed: Vec<usize> = match policy {
            LoggingPolicy::Uniform => (0..self.arms.len()).collect(),
            LoggingPolicy::Restricted(a) => a.clone(),
        };
        if allowed.is_empty() || allowed.iter().any(|&a| a >= self.arms.len()) {
            return Err(Error::Config("logging policy has no valid arms".into()));
        }
        Ok(self
            .logged
            .iter()
            .map(|&i| {
                let ex = &self.examples[i];
                let arm = allowed[rng.gen_range(0..allowed.len())];
                LoggedInteraction {
                    context: ex.context.clone(),
                    arm,
                    query: self.query(&ex.context, arm),
                    reward: ex.labels.contains(&self.arms[arm]),
                }
            })
            .collect())
    }
}

impl LoggedInteraction {
    pub fn labeled(&self) -> LabeledQuery {
        LabeledQuery::new(self.query.clone(), self.reward)
    }
}
