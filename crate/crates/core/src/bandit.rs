//! Action selection and the online learning loop.
//!
//! Each batch plays `batch_length` rounds with the current model, storing
//! `(query, arm, reward, p)` for the chosen arm in a buffer. At the end of the
//! batch a sampler subsamples the buffer and `trees_per_batch` new trees are
//! boosted onto the model. Regret counts rounds whose chosen arm is not one
//! of the context's correct labels.

use alloc::vec::Vec;

use rand::Rng;

use crate::boosting::{cold_start, fit_stage, prior_log_odds, BoostParams, BoostedModel, LabeledQuery};
use crate::data::{BanditEnvironment, LoggedInteraction};
use crate::logic::ConstId;
use crate::math::{argmax, sample_index, softmax};
use crate::sampling::{BufferEntry, Sampler};
use crate::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Exploration {
    /// Sample from `softmax(p / tau)`.
    Softmax { tau: f64 },
    /// Uniform arm with probability `epsilon`, argmax otherwise.
    EpsilonGreedy { epsilon: f64 },
    /// Pure argmax.
    Greedy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyConfig {
    pub exploration: Exploration,
    /// Rounds per batch (`T`).
    pub batch_length: usize,
    /// Number of batches (`N`).
    pub n_batches: usize,
    /// Entries the sampler draws from each batch buffer.
    pub sample_size: usize,
    pub sampler: Sampler,
    /// Trees per batch, step size and tree shape.
    pub boost: BoostParams,
    /// Keep the buffer across batches instead of clearing it.
    pub accumulate_buffer: bool,
    pub seed: u64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            exploration: Exploration::Softmax { tau: 0.1 },
            batch_length: 128,
            n_batches: 40,
            sample_size: 64,
            sampler: Sampler::Informed,
            boost: BoostParams::default(),
            accumulate_buffer: false,
            seed: 0,
        }
    }
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<()> {
        match self.exploration {
            Exploration::Softmax { tau } if !(tau > 0.0 && tau.is_finite()) => {
                return Err(Error::Config("tau must be positive".into()))
            }
            Exploration::EpsilonGreedy { epsilon } if !(0.0..=1.0).contains(&epsilon) => {
                return Err(Error::Config("epsilon must lie in [0, 1]".into()))
            }
            _ => {}
        }
        if self.batch_length == 0 || self.n_batches == 0 {
            return Err(Error::Config("batch length and batch count must be >= 1".into()));
        }
        if self.sample_size < 2 {
            return Err(Error::Config("sample size must be >= 2".into()));
        }
        self.boost.validate()
    }
}

/// One played round.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundRecord {
    /// 1-based round index.
    pub t: usize,
    /// 1-based batch index; 0 for policies without batches.
    pub batch: usize,
    /// Context constants of the round.
    pub context: Vec<ConstId>,
    /// Per-arm scores the decision was based on.
    pub arm_probs: Vec<f64>,
    pub chosen_arm: usize,
    pub reward: bool,
    pub regret_cum: u64,
    /// The chosen arm's model probability (or score) at decision time.
    pub p_chosen: f64,
}

impl RoundRecord {
    pub fn regret_increment(&self) -> u64 {
        u64::from(!self.reward)
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput<M> {
    pub model: M,
    pub rounds: Vec<RoundRecord>,
    /// The environment ran out of rounds before the configured horizon.
    pub truncated: bool,
}

impl<M> RunOutput<M> {
    /// Cumulative regret after each round.
    pub fn regret(&self) -> Vec<u64> {
        self.rounds.iter().map(|r| r.regret_cum).collect()
    }

    pub fn final_regret(&self) -> u64 {
        self.rounds.last().map_or(0, |r| r.regret_cum)
    }
}

/// Reward probability of every arm for one context.
pub fn arm_probabilities(model: &BoostedModel, env: &BanditEnvironment, context: &[ConstId]) -> Result<Vec<f64>> {
    (0..env.arms().len()).map(|a| model.predict_prob(&env.query(context, a), env.store())).collect()
}

/// Selection distribution `softmax(p / tau)`.
pub fn softmax_weights(probs: &[f64], tau: f64) -> Vec<f64> {
    let scaled: Vec<f64> = probs.iter().map(|p| p / tau).collect();
    softmax(&scaled)
}

pub fn select_softmax<R: Rng + ?Sized>(probs: &[f64], tau: f64, rng: &mut R) -> usize {
    sample_index(&softmax_weights(probs, tau), rng)
}

pub fn select_epsilon_greedy<R: Rng + ?Sized>(probs: &[f64], epsilon: f64, rng: &mut R) -> usize {
    if rng.gen::<f64>() < epsilon {
        rng.gen_range(0..probs.len())
    } else {
        argmax(probs).unwrap_or(0)
    }
}

pub fn select<R: Rng + ?Sized>(probs: &[f64], exploration: Exploration, rng: &mut R) -> usize {
    match exploration {
        Exploration::Softmax { tau } => select_softmax(probs, tau, rng),
        Exploration::EpsilonGreedy { epsilon } => select_epsilon_greedy(probs, epsilon, rng),
        Exploration::Greedy => argmax(probs).unwrap_or(0),
    }
}

const SAMPLING_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

/// How the reward probability of each arm is modelled.
trait RewardModel: Sized {
    fn cold_start(env: &BanditEnvironment, logged: &[LoggedInteraction], boost: &BoostParams) -> Result<Self>;
    fn probabilities(&self, env: &BanditEnvironment, context: &[ConstId]) -> Result<Vec<f64>>;
    fn fit(&mut self, env: &BanditEnvironment, sample: Vec<BufferEntry>, boost: &BoostParams) -> Result<()>;
}

impl RewardModel for BoostedModel {
    fn cold_start(env: &BanditEnvironment, logged: &[LoggedInteraction], boost: &BoostParams) -> Result<Self> {
        let cold: Vec<LabeledQuery> = logged.iter().map(LoggedInteraction::labeled).collect();
        cold_start(&cold, env.store(), env.language(), boost)
    }

    fn probabilities(&self, env: &BanditEnvironment, context: &[ConstId]) -> Result<Vec<f64>> {
        arm_probabilities(self, env, context)
    }

    fn fit(&mut self, env: &BanditEnvironment, sample: Vec<BufferEntry>, boost: &BoostParams) -> Result<()> {
        let batch: Vec<LabeledQuery> = sample.into_iter().map(|e| LabeledQuery::new(e.query, e.reward)).collect();
        fit_stage(self, &batch, env.store(), env.language(), boost).map(|_| ())
    }
}

/// One boosted model per arm, each fitted only to that arm's entries.
/// An arm without logged data starts from the pooled prior and no trees.
impl RewardModel for Vec<BoostedModel> {
    fn cold_start(env: &BanditEnvironment, logged: &[LoggedInteraction], boost: &BoostParams) -> Result<Self> {
        if logged.is_empty() {
            return Err(Error::Config("cold start needs logged data".into()));
        }
        let all: Vec<LabeledQuery> = logged.iter().map(LoggedInteraction::labeled).collect();
        let prior = prior_log_odds(&all);
        (0..env.arms().len())
            .map(|a| {
                let own: Vec<LabeledQuery> =
                    logged.iter().filter(|l| l.arm == a).map(LoggedInteraction::labeled).collect();
                if own.is_empty() {
                    Ok(BoostedModel::new(env.target(), prior))
                } else {
                    cold_start(&own, env.store(), env.language(), boost)
                }
            })
            .collect()
    }

    fn probabilities(&self, env: &BanditEnvironment, context: &[ConstId]) -> Result<Vec<f64>> {
        self.iter().enumerate().map(|(a, m)| m.predict_prob(&env.query(context, a), env.store())).collect()
    }

    fn fit(&mut self, env: &BanditEnvironment, sample: Vec<BufferEntry>, boost: &BoostParams) -> Result<()> {
        for (a, model) in self.iter_mut().enumerate() {
            let own: Vec<LabeledQuery> =
                sample.iter().filter(|e| e.arm == a).map(|e| LabeledQuery::new(e.query.clone(), e.reward)).collect();
            if !own.is_empty() {
                fit_stage(model, &own, env.store(), env.language(), boost)?;
            }
        }
        Ok(())
    }
}

/// The relational boosted bandit loop. Rounds are drawn from `env` in stream
/// order; background-knowledge deltas are revealed after each round.
pub fn run_rb2(
    env: &mut BanditEnvironment,
    config: &PolicyConfig,
    logged: &[LoggedInteraction],
) -> Result<RunOutput<BoostedModel>> {
    run_rb2_with(env, config, logged, &mut |_, _| {})
}

/// [`run_rb2`] with a callback invoked after the cold start (batch 0) and
/// after every batch update.
pub fn run_rb2_with(
    env: &mut BanditEnvironment,
    config: &PolicyConfig,
    logged: &[LoggedInteraction],
    on_model: &mut dyn FnMut(usize, &BoostedModel),
) -> Result<RunOutput<BoostedModel>> {
    run_loop(env, config, logged, on_model)
}

/// [`run_rb2_with`] with a separate model per arm instead of one model
/// taking the arm as a query argument. Model `a` scores arm `a` only.
pub fn run_rb2_per_arm_with(
    env: &mut BanditEnvironment,
    config: &PolicyConfig,
    logged: &[LoggedInteraction],
    on_model: &mut dyn FnMut(usize, &Vec<BoostedModel>),
) -> Result<RunOutput<Vec<BoostedModel>>> {
    run_loop(env, config, logged, on_model)
}

fn run_loop<M: RewardModel>(
    env: &mut BanditEnvironment,
    config: &PolicyConfig,
    logged: &[LoggedInteraction],
    on_model: &mut dyn FnMut(usize, &M),
) -> Result<RunOutput<M>> {
    config.validate()?;
    if env.arms().is_empty() {
        return Err(Error::Config("environment has no arms".into()));
    }
    let mut model = M::cold_start(env, logged, &config.boost)?;
    on_model(0, &model);

    let mut select_rng = crate::seeded_rng(config.seed);
    let mut sample_rng = crate::seeded_rng(config.seed ^ SAMPLING_STREAM);
    let mut buffer: Vec<BufferEntry> = Vec::new();
    let mut rounds = Vec::with_capacity(config.batch_length * config.n_batches);
    let mut regret = 0u64;
    let mut t = 0usize;
    let mut truncated = false;

    for batch in 1..=config.n_batches {
        let mut played = 0;
        while played < config.batch_length {
            if t >= env.num_rounds() {
                truncated = true;
                break;
            }
            let context = env.context(t).to_vec();
            let probs = model.probabilities(env, &context)?;
            let arm = select(&probs, config.exploration, &mut select_rng);
            let reward = env.reward(t, arm);
            regret += u64::from(!reward);
            buffer.push(BufferEntry { query: env.query(&context, arm), arm, reward, p: probs[arm] });
            rounds.push(RoundRecord {
                t: t + 1,
                batch,
                context,
                chosen_arm: arm,
                reward,
                regret_cum: regret,
                p_chosen: probs[arm],
                arm_probs: probs,
            });
            t += 1;
            played += 1;
            env.apply_updates(t)?;
        }
        if played > 0 && !buffer.is_empty() {
            let sample = config.sampler.sample(&buffer, config.sample_size, &mut sample_rng);
            model.fit(env, sample, &config.boost)?;
            on_model(batch, &model);
        }
        if !config.accumulate_buffer {
            buffer.clear();
        }
        if truncated {
            log::warn!("environment exhausted after {t} rounds, in batch {batch}");
            break;
        }
    }
    Ok(RunOutput { model, rounds, truncated })
}

/// Incremental boosting without exploration: pure argmax actions and uniform
/// random subsampling of each buffer.
pub fn run_batch_no_exploration(
    env: &mut BanditEnvironment,
    config: &PolicyConfig,
    logged: &[LoggedInteraction],
) -> Result<RunOutput<BoostedModel>> {
    let config = PolicyConfig { exploration: Exploration::Greedy, sampler: Sampler::Random, ..config.clone() };
    run_rb2(env, &config, logged)
}
