//! Compression of a boosted model into one readable tree.
//!
//! The model's reward probability is computed on every query and a single
//! relational regression tree with mean leaves is fitted to those values, so
//! each leaf reads directly as the probability of reward 1.

use alloc::vec::Vec;

use crate::boosting::BoostedModel;
use crate::logic::{FactStore, GroundAtom};
use crate::tilde::{learn_tree, Language, Leaf, MeanLeaf, Node, RegressionExample, RelationalTree, TreeParams};
use crate::{Error, Result};

/// Default pruning threshold.
pub const DEFAULT_DELTA: f64 = 0.01;

/// Fits one tree to the model's probabilities on `queries`.
pub fn distill(
    model: &BoostedModel,
    queries: &[GroundAtom],
    store: &FactStore,
    lang: &Language,
    params: &TreeParams,
) -> Result<RelationalTree> {
    if queries.is_empty() {
        return Err(Error::NoExamples);
    }
    let examples = queries
        .iter()
        .map(|q| Ok(RegressionExample::new(q.clone(), model.predict_prob(q, store)?)))
        .collect::<Result<Vec<_>>>()?;
    learn_tree(&examples, store, lang, params, &MeanLeaf)
}

/// Merges sibling leaves whose values differ by less than `delta` into their
/// example-weighted mean, bottom-up, until no such pair remains.
pub fn prune(tree: &RelationalTree, delta: f64) -> RelationalTree {
    RelationalTree::new(tree.target, prune_node(&tree.root, delta))
}

fn prune_node(node: &Node, delta: f64) -> Node {
    let Node::Split(split) = node else {
        return node.clone();
    };
    let on_true = prune_node(&split.on_true, delta);
    let on_false = prune_node(&split.on_false, delta);
    if let (Node::Leaf(a), Node::Leaf(b)) = (&on_true, &on_false) {
        if libm::fabs(a.value - b.value) < delta {
            return Node::Leaf(merge(a, b));
        }
    }
    Node::split(split.test.clone(), on_true, on_false)
}

fn merge(a: &Leaf, b: &Leaf) -> Leaf {
    let n = a.n_examples + b.n_examples;
    let value = if n == 0 {
        0.5 * (a.value + b.value)
    } else {
        (a.value * a.n_examples as f64 + b.value * b.n_examples as f64) / n as f64
    };
    Leaf { value, n_examples: n }
}

/// Share of queries on which the tree and the model agree about
/// `probability >= 0.5`.
pub fn fidelity(tree: &RelationalTree, model: &BoostedModel, queries: &[GroundAtom], store: &FactStore) -> Result<f64> {
    if queries.is_empty() {
        return Err(Error::NoExamples);
    }
    let mut agree = 0usize;
    for q in queries {
        let t = tree.evaluate(q, store)? >= 0.5;
        let m = model.predict_prob(q, store)? >= 0.5;
        agree += usize::from(t == m);
    }
    Ok(agree as f64 / queries.len() as f64)
}
