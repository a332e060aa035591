//! Distillation of boosted models into a single tree.

use proptest::prelude::*;
use rb2_core::boosting::{cold_start, BoostParams, BoostedModel, LabeledQuery};
use rb2_core::data::{generate_synthetic, Dataset, SyntheticParams, SyntheticRule};
use rb2_core::distill::{distill, fidelity, prune};
use rb2_core::logic::GroundAtom;
use rb2_core::tilde::{RelationalTree, TreeParams};

fn queries(ds: &Dataset) -> Vec<GroundAtom> {
    let arms = ds.arms();
    ds.examples.iter().flat_map(|e| arms.iter().map(|&a| ds.query(&e.context, a))).collect()
}

fn model(ds: &Dataset, k: usize) -> BoostedModel {
    let arms = ds.arms();
    let logged: Vec<LabeledQuery> = ds
        .examples
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let a = arms[(i * 7) % arms.len()];
            LabeledQuery::new(ds.query(&e.context, a), e.labels.contains(&a))
        })
        .collect();
    let params = BoostParams { trees_per_batch: k, ..Default::default() };
    cold_start(&logged, &ds.store, &ds.language, &params).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn distilled_leaves_stay_within_the_model_range(
        seed in 0u64..500,
        users in 30usize..90,
        k in 1usize..6,
        depth in 0usize..5,
        delta in 0.0..0.3f64,
        noise in 0.0..0.2f64,
        relational in any::<bool>(),
    ) {
        let rule = if relational { SyntheticRule::Relational } else { SyntheticRule::Propositional };
        let ds = generate_synthetic(&SyntheticParams { n_users: users, n_movies: 5, rule, noise, seed, ..Default::default() })
            .unwrap()
            .dataset;
        let m = model(&ds, k);
        let qs = queries(&ds);
        let probs: Vec<f64> = qs.iter().map(|q| m.predict_prob(q, &ds.store).unwrap()).collect();
        let (lo, hi) = probs.iter().fold((1.0f64, 0.0f64), |(lo, hi), &p| (lo.min(p), hi.max(p)));
        let tree = distill(&m, &qs, &ds.store, &ds.language, &TreeParams { max_depth: depth, ..Default::default() }).unwrap();
        let pruned = prune(&tree, delta);
        for t in [&tree, &pruned] {
            prop_assert!(t.depth() <= depth);
            let n: usize = t.leaves().iter().map(|l| l.n_examples).sum();
            prop_assert_eq!(n, qs.len());
            for l in t.leaves() {
                prop_assert!(l.value >= lo - 1e-12 && l.value <= hi + 1e-12);
            }
            let f = fidelity(t, &m, &qs, &ds.store).unwrap();
            prop_assert!((0.0..=1.0).contains(&f));
        }
        // Means of the model's probabilities are preserved overall.
        let mean = probs.iter().sum::<f64>() / probs.len() as f64;
        let tree_mean = tree.leaves().iter().map(|l| l.value * l.n_examples as f64).sum::<f64>() / qs.len() as f64;
        prop_assert!((mean - tree_mean).abs() < 1e-9);
    }
}

#[test]
fn constant_model_distills_to_one_leaf() {
    let ds = generate_synthetic(&SyntheticParams { n_users: 40, ..Default::default() }).unwrap().dataset;
    let mut m = BoostedModel::new(ds.target(), 0.3);
    m.push_stage(RelationalTree::constant(ds.target(), -1.0), 0.5).unwrap();
    let qs = queries(&ds);
    let tree = distill(&m, &qs, &ds.store, &ds.language, &TreeParams::default()).unwrap();
    assert_eq!(tree.depth(), 0);
    let want = 1.0 / (1.0 + (-(0.3f64 - 0.5)).exp());
    assert!((tree.leaves()[0].value - want).abs() < 1e-12);
    assert_eq!(fidelity(&tree, &m, &qs, &ds.store).unwrap(), 1.0);
}

#[test]
fn delta_one_collapses_any_probability_tree() {
    let ds = generate_synthetic(&SyntheticParams { n_users: 80, seed: 3, ..Default::default() }).unwrap().dataset;
    let m = model(&ds, 4);
    let qs = queries(&ds);
    let tree = distill(&m, &qs, &ds.store, &ds.language, &TreeParams { max_depth: 4, ..Default::default() }).unwrap();
    assert!(tree.depth() > 0);
    assert_eq!(prune(&tree, 1.0 + 1e-12).leaves().len(), 1);
}
