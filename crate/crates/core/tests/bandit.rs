//! The online loop end to end on small synthetic domains, plus selection
//! distributions checked against exact softmax weights.

use proptest::prelude::*;
use rand::Rng;
use rb2_core::bandit::{
    arm_probabilities, run_batch_no_exploration, run_rb2_with, select_epsilon_greedy, select_softmax, softmax_weights,
    Exploration, PolicyConfig,
};
use rb2_core::boosting::{BoostParams, BoostedModel};
use rb2_core::data::{generate_synthetic, make_environment, FactDelta, LoggingPolicy, SyntheticParams};
use rb2_core::sampling::Sampler;
use rb2_core::seeded_rng;
use rb2_core::tilde::TreeParams;

fn config(seed: u64, batches: usize, sampler: Sampler, exploration: Exploration) -> PolicyConfig {
    PolicyConfig {
        exploration,
        batch_length: 16,
        n_batches: batches,
        sample_size: 8,
        sampler,
        boost: BoostParams { trees_per_batch: 4, eta: 1.0, tree: TreeParams { max_depth: 2, ..Default::default() } },
        accumulate_buffer: seed.is_multiple_of(2),
        seed,
    }
}

fn exploration() -> impl Strategy<Value = Exploration> {
    prop_oneof![
        (0.01..2.0f64).prop_map(|tau| Exploration::Softmax { tau }),
        (0.0..=1.0f64).prop_map(|epsilon| Exploration::EpsilonGreedy { epsilon }),
        Just(Exploration::Greedy),
    ]
}

fn sampler() -> impl Strategy<Value = Sampler> {
    prop_oneof![Just(Sampler::Informed), Just(Sampler::Greedy), Just(Sampler::Random)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn run_bookkeeping_is_consistent(
        seed in 0u64..1000,
        batches in 1usize..5,
        s in sampler(),
        e in exploration(),
        users in 40usize..120,
    ) {
        let dom = generate_synthetic(&SyntheticParams { n_users: users, n_movies: 5, seed, ..Default::default() }).unwrap();
        let mut env = make_environment(&dom.dataset, seed, 0.2, vec![]).unwrap();
        let logged = env.log_cold_start(&LoggingPolicy::Uniform, &mut seeded_rng(seed)).unwrap();
        let cfg = config(seed, batches, s, e);
        let mut models: Vec<(usize, BoostedModel)> = Vec::new();
        let out = run_rb2_with(&mut env, &cfg, &logged, &mut |b, m| models.push((b, m.clone()))).unwrap();

        let horizon = (cfg.batch_length * batches).min(env.num_rounds());
        prop_assert_eq!(out.rounds.len(), horizon);
        prop_assert_eq!(out.truncated, horizon < cfg.batch_length * batches);
        let played_batches = horizon.div_ceil(cfg.batch_length);
        prop_assert_eq!(out.model.len(), 4 * (1 + played_batches));
        prop_assert_eq!(models.len(), 1 + played_batches);

        let mut regret = 0;
        for (t, r) in out.rounds.iter().enumerate() {
            prop_assert_eq!(r.t, t + 1);
            prop_assert_eq!(r.batch, t / cfg.batch_length + 1);
            prop_assert_eq!(r.reward, env.reward(t, r.chosen_arm));
            regret += r.regret_increment();
            prop_assert_eq!(r.regret_cum, regret);
            prop_assert_eq!(r.p_chosen, r.arm_probs[r.chosen_arm]);
            // Decisions use the model fitted after the previous batch.
            let (b, m) = &models[r.batch - 1];
            prop_assert_eq!(*b, r.batch - 1);
            prop_assert_eq!(&arm_probabilities(m, &env, &r.context).unwrap(), &r.arm_probs);
            if matches!(e, Exploration::Greedy) {
                let best = r.arm_probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                prop_assert_eq!(r.arm_probs.iter().position(|&p| p == best).unwrap(), r.chosen_arm);
            }
        }
        prop_assert!(out.regret().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn softmax_modal_arm_is_the_argmax(
        probs in prop::collection::vec(0.0..1.0f64, 1..12),
        tau in 0.001..10.0f64,
    ) {
        let w = softmax_weights(&probs, tau);
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for i in 0..probs.len() {
            for j in 0..probs.len() {
                if probs[i] > probs[j] {
                    prop_assert!(w[i] >= w[j]);
                }
            }
        }
    }
}

#[test]
fn softmax_selection_passes_chi_square() {
    let probs = [0.1, 0.5, 0.55, 0.9, 0.3];
    let tau = 0.2f64;
    let exact: Vec<f64> = {
        let e: Vec<f64> = probs.iter().map(|p| (p / tau).exp()).collect();
        let z: f64 = e.iter().sum();
        e.iter().map(|v| v / z).collect()
    };
    let n = 200_000;
    let mut counts = [0usize; 5];
    let mut rng = seeded_rng(17);
    for _ in 0..n {
        counts[select_softmax(&probs, tau, &mut rng)] += 1;
    }
    let chi2: f64 = counts
        .iter()
        .zip(&exact)
        .map(|(&c, &p)| {
            let e = p * n as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    // 4 degrees of freedom: the 0.999 quantile is 18.47.
    assert!(chi2 < 18.47, "chi-square {chi2}");
}

#[test]
fn epsilon_greedy_mixes_uniform_and_greedy() {
    let probs = [0.2, 0.9, 0.4, 0.1];
    let eps = 0.3;
    let n = 200_000;
    let mut rng = seeded_rng(3);
    let mut counts = [0usize; 4];
    for _ in 0..n {
        counts[select_epsilon_greedy(&probs, eps, &mut rng)] += 1;
    }
    for (a, &c) in counts.iter().enumerate() {
        let want = eps / 4.0 + if a == 1 { 1.0 - eps } else { 0.0 };
        assert!((c as f64 / n as f64 - want).abs() < 0.005, "arm {a}: {c}");
    }
}

#[test]
fn identical_seeds_replay_identically() {
    let dom = generate_synthetic(&SyntheticParams { n_users: 150, seed: 2, ..Default::default() }).unwrap();
    let env = make_environment(&dom.dataset, 5, 0.1, vec![]).unwrap();
    let logged = env.log_cold_start(&LoggingPolicy::Uniform, &mut seeded_rng(1)).unwrap();
    let cfg = config(9, 3, Sampler::Informed, Exploration::Softmax { tau: 0.1 });
    let a = run_rb2_with(&mut env.clone(), &cfg, &logged, &mut |_, _| {}).unwrap();
    let b = run_rb2_with(&mut env.clone(), &cfg, &logged, &mut |_, _| {}).unwrap();
    assert_eq!(a.rounds, b.rounds);
    let other = PolicyConfig { seed: 10, ..cfg };
    let c = run_rb2_with(&mut env.clone(), &other, &logged, &mut |_, _| {}).unwrap();
    assert_ne!(a.rounds, c.rounds);
}

#[test]
fn fact_deltas_are_revealed_during_the_run() {
    let dom = generate_synthetic(&SyntheticParams { n_users: 120, seed: 6, ..Default::default() }).unwrap();
    let ds = dom.dataset;
    let schema = ds.store.schema();
    let liked = schema.predicate("liked").unwrap();
    let users = schema.constants_of_type(schema.type_id("user").unwrap()).to_vec();
    let movies = schema.constants_of_type(schema.type_id("movie").unwrap()).to_vec();
    let mut rng = seeded_rng(4);
    let deltas: Vec<FactDelta> = (0..30)
        .map(|k| FactDelta {
            t: 1 + k,
            fact: rb2_core::logic::GroundAtom::new(
                liked,
                vec![users[rng.gen_range(0..users.len())], movies[rng.gen_range(0..movies.len())]],
            ),
        })
        .collect();
    let before = ds.store.len();
    let new_facts = deltas
        .iter()
        .filter(|d| !ds.store.contains(&d.fact))
        .map(|d| &d.fact)
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    let mut env = make_environment(&ds, 0, 0.2, deltas).unwrap();
    let logged = env.log_cold_start(&LoggingPolicy::Uniform, &mut seeded_rng(0)).unwrap();
    let cfg = config(1, 2, Sampler::Random, Exploration::Greedy);
    run_batch_no_exploration(&mut env, &cfg, &logged).unwrap();
    assert_eq!(env.store().len(), before + new_facts);
}
