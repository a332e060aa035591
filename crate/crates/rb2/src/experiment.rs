//! One seeded run of one algorithm on one dataset.

use std::fmt;
use std::str::FromStr;

use rb2_core::bandit::{run_rb2_per_arm_with, run_rb2_with, Exploration, PolicyConfig, RoundRecord};
use rb2_core::baselines::{run_linucb, LinUcbParams, DEFAULT_MAX_DIM};
use rb2_core::boosting::{BoostParams, BoostedModel};
use rb2_core::data::{make_environment, BanditEnvironment, Dataset, FactDelta, LoggedInteraction, LoggingPolicy};
use rb2_core::sampling::Sampler;
use rb2_core::tilde::TreeParams;

use crate::roundlog::render_round_log;
use crate::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Softmax exploration, informed sampling.
    Rb2Informed,
    /// Softmax exploration, greedy sampling.
    Rb2Greedy,
    /// Epsilon-greedy exploration, random sampling.
    EpsilonGreedy,
    /// Argmax actions, random sampling.
    BatchNoExplore,
    /// Propositionalized LinUCB.
    LinUcb,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] =
        [Self::Rb2Informed, Self::Rb2Greedy, Self::EpsilonGreedy, Self::BatchNoExplore, Self::LinUcb];

    pub fn name(self) -> &'static str {
        match self {
            Self::Rb2Informed => "rb2-informed",
            Self::Rb2Greedy => "rb2-greedy",
            Self::EpsilonGreedy => "epsilon-greedy",
            Self::BatchNoExplore => "batch-noexplore",
            Self::LinUcb => "linucb",
        }
    }

    pub fn is_boosted(self) -> bool {
        self != Self::LinUcb
    }

    fn default_sampler(self) -> Sampler {
        match self {
            Self::Rb2Informed => Sampler::Informed,
            Self::Rb2Greedy => Sampler::Greedy,
            _ => Sampler::Random,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|a| a.name()).collect();
            Error::Invalid(format!("unknown algorithm `{s}` (expected one of {})", names.join(", ")))
        })
    }
}

/// Hyperparameters shared by all algorithms of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub batch_size: usize,
    pub batches: usize,
    pub trees_per_batch: usize,
    pub tau: f64,
    pub epsilon: f64,
    pub eta: f64,
    /// Overrides the algorithm's sampler, except for `batch-noexplore`.
    pub sampler: Option<Sampler>,
    /// Entries drawn per batch; half the batch size when unset.
    pub sample_size: Option<usize>,
    pub alpha: f64,
    pub coldstart_frac: f64,
    /// Restricts cold-start logging to these arm names.
    pub coldstart_arms: Option<Vec<String>>,
    pub max_depth: usize,
    pub linucb_max_dim: usize,
    pub accumulate_buffer: bool,
    /// Fits one model per arm instead of one model with the arm as an argument.
    pub per_arm_models: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            batch_size: 128,
            batches: 40,
            trees_per_batch: 6,
            tau: 0.1,
            epsilon: 0.1,
            eta: 1.0,
            sampler: None,
            sample_size: None,
            alpha: 0.1,
            coldstart_frac: 0.05,
            coldstart_arms: None,
            max_depth: TreeParams::default().max_depth,
            linucb_max_dim: DEFAULT_MAX_DIM,
            accumulate_buffer: false,
            per_arm_models: false,
        }
    }
}

impl ExperimentConfig {
    pub fn sample_size(&self) -> usize {
        self.sample_size.unwrap_or((self.batch_size / 2).max(2))
    }

    pub fn policy(&self, algo: Algorithm, seed: u64) -> Result<PolicyConfig> {
        let exploration = match algo {
            Algorithm::Rb2Informed | Algorithm::Rb2Greedy => Exploration::Softmax { tau: self.tau },
            Algorithm::EpsilonGreedy => Exploration::EpsilonGreedy { epsilon: self.epsilon },
            Algorithm::BatchNoExplore => Exploration::Greedy,
            Algorithm::LinUcb => return Err(Error::Invalid("linucb has no boosting policy".into())),
        };
        let sampler = match (algo, self.sampler) {
            (Algorithm::BatchNoExplore, _) | (_, None) => algo.default_sampler(),
            (_, Some(s)) => s,
        };
        let cfg = PolicyConfig {
            exploration,
            batch_length: self.batch_size,
            n_batches: self.batches,
            sample_size: self.sample_size(),
            sampler,
            boost: BoostParams {
                trees_per_batch: self.trees_per_batch,
                eta: self.eta,
                tree: TreeParams { max_depth: self.max_depth, ..TreeParams::default() },
            },
            accumulate_buffer: self.accumulate_buffer,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Every setting as `key=value` pairs, using the config-file keys.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut v = vec![
            ("batch-size", self.batch_size.to_string()),
            ("batches", self.batches.to_string()),
            ("trees-per-batch", self.trees_per_batch.to_string()),
            ("tau", format!("{:?}", self.tau)),
            ("epsilon", format!("{:?}", self.epsilon)),
            ("eta", format!("{:?}", self.eta)),
            ("sampler", self.sampler.map_or("default", |s| s.name()).to_string()),
            ("sample-size", self.sample_size().to_string()),
            ("alpha", format!("{:?}", self.alpha)),
            ("coldstart-frac", format!("{:?}", self.coldstart_frac)),
            ("coldstart-arms", self.coldstart_arms.as_ref().map_or("all".into(), |a| a.join(","))),
            ("max-depth", self.max_depth.to_string()),
            ("linucb-max-dim", self.linucb_max_dim.to_string()),
            ("accumulate-buffer", self.accumulate_buffer.to_string()),
            ("per-arm-models", self.per_arm_models.to_string()),
        ];
        v.sort_by(|a, b| a.0.cmp(b.0));
        v.into_iter().map(|(k, val)| (k.to_string(), val)).collect()
    }
}

/// Label of an (algorithm, configuration) pair in file names and legends.
pub fn run_label(algo: Algorithm, cfg: &ExperimentConfig) -> String {
    match algo {
        Algorithm::LinUcb => format!("linucb-alpha{:?}", cfg.alpha),
        a => a.name().to_string(),
    }
}

const LOGGING_STREAM: u64 = 0x10_99ed;

#[derive(Clone, Debug)]
pub struct RunResult {
    pub label: String,
    pub algo: Algorithm,
    pub seed: u64,
    /// Environment after the run, with all revealed deltas applied.
    pub env: BanditEnvironment,
    pub logged: Vec<LoggedInteraction>,
    pub rounds: Vec<RoundRecord>,
    pub truncated: bool,
    pub model: Option<TrainedModel>,
    /// `(batch, model)` after the cold start (batch 0) and after each batch.
    pub checkpoints: Vec<(usize, TrainedModel)>,
    /// LinUCB feature vocabulary, one column per line.
    pub vocabulary: Option<String>,
    pub metadata: Vec<(String, String)>,
}

/// Reward models of a boosted run.
#[derive(Clone, Debug, PartialEq)]
pub enum TrainedModel {
    /// One model whose queries carry the arm.
    Shared(BoostedModel),
    /// One model per arm, in arm order.
    PerArm(Vec<BoostedModel>),
}

impl TrainedModel {
    pub fn shared(&self) -> Option<&BoostedModel> {
        match self {
            TrainedModel::Shared(m) => Some(m),
            TrainedModel::PerArm(_) => None,
        }
    }

    /// `(name suffix, model)` pairs: empty for a shared model, `-{arm}` per arm.
    pub fn parts<'a>(&'a self, env: &BanditEnvironment) -> Vec<(String, &'a BoostedModel)> {
        match self {
            TrainedModel::Shared(m) => vec![(String::new(), m)],
            TrainedModel::PerArm(ms) => {
                let schema = env.store().schema();
                env.arms().iter().zip(ms).map(|(&a, m)| (format!("-{}", schema.constant_name(a)), m)).collect()
            }
        }
    }
}

impl RunResult {
    pub fn final_regret(&self) -> u64 {
        self.rounds.last().map_or(0, |r| r.regret_cum)
    }

    pub fn regret(&self) -> Vec<u64> {
        self.rounds.iter().map(|r| r.regret_cum).collect()
    }

    pub fn csv(&self) -> Result<String> {
        render_round_log(&self.metadata, &self.rounds, self.env.store().schema(), self.env.arms())
    }
}

/// Runs `algo` on a fresh environment shuffled by `seed`.
pub fn run_experiment(
    dataset: &Dataset,
    deltas: &[FactDelta],
    algo: Algorithm,
    seed: u64,
    cfg: &ExperimentConfig,
    keep_checkpoints: bool,
) -> Result<RunResult> {
    let mut env = make_environment(dataset, seed, cfg.coldstart_frac, deltas.to_vec())?;
    let policy = match &cfg.coldstart_arms {
        None => LoggingPolicy::Uniform,
        Some(names) => {
            let schema = env.store().schema();
            let idx = names
                .iter()
                .map(|n| {
                    env.arms()
                        .iter()
                        .position(|&a| schema.constant_name(a) == n)
                        .ok_or_else(|| Error::Invalid(format!("unknown cold-start arm `{n}`")))
                })
                .collect::<Result<Vec<usize>>>()?;
            LoggingPolicy::Restricted(idx)
        }
    };
    let logged = env.log_cold_start(&policy, &mut rb2_core::seeded_rng(seed ^ LOGGING_STREAM))?;
    let horizon = cfg.batch_size * cfg.batches;
    let label = run_label(algo, cfg);

    let mut checkpoints = Vec::new();
    let (rounds, truncated, model, vocabulary) = if algo.is_boosted() && cfg.per_arm_models {
        let policy = cfg.policy(algo, seed)?;
        let out = run_rb2_per_arm_with(&mut env, &policy, &logged, &mut |b, m| {
            if keep_checkpoints {
                checkpoints.push((b, TrainedModel::PerArm(m.clone())));
            }
        })?;
        (out.rounds, out.truncated, Some(TrainedModel::PerArm(out.model)), None)
    } else if algo.is_boosted() {
        let policy = cfg.policy(algo, seed)?;
        let out = run_rb2_with(&mut env, &policy, &logged, &mut |b, m| {
            if keep_checkpoints {
                checkpoints.push((b, TrainedModel::Shared(m.clone())));
            }
        })?;
        (out.rounds, out.truncated, Some(TrainedModel::Shared(out.model)), None)
    } else {
        let params = LinUcbParams { alpha: cfg.alpha, max_dim: cfg.linucb_max_dim, bias: true, rounds: horizon };
        let out = run_linucb(&mut env, &params, &logged)?;
        let vocab = out.model.encoder.vocabulary(env.store());
        (out.rounds, out.truncated, None, Some(vocab))
    };

    let mut metadata = vec![
        ("format".to_string(), "rb2-roundlog 1".to_string()),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("algo".to_string(), algo.name().to_string()),
        ("label".to_string(), label.clone()),
        ("seed".to_string(), seed.to_string()),
        ("dataset".to_string(), dataset.name.clone()),
        ("examples".to_string(), dataset.examples.len().to_string()),
        ("arms".to_string(), env.arms().len().to_string()),
        ("logged".to_string(), logged.len().to_string()),
        ("stream-rounds".to_string(), env.num_rounds().to_string()),
        ("fact-deltas".to_string(), deltas.len().to_string()),
        ("truncated".to_string(), truncated.to_string()),
    ];
    metadata.extend(cfg.entries());
    Ok(RunResult { label, algo, seed, env, logged, rounds, truncated, model, checkpoints, vocabulary, metadata })
}
