use alloc::vec::Vec;

use super::split::{score_members, weighted_sse};
use super::{refinements, Language, Leaf, Node, RelationalTree, Split};
use crate::logic::{Atom, FactStore, GroundAtom, Substitution};
use crate::{Error, Result};

/// One regression target: a ground query of the target predicate, the value
/// to fit and a nonnegative weight. All examples of a fit share the store
/// passed to [`learn_tree`].
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionExample {
    pub query: GroundAtom,
    pub target: f64,
    pub weight: f64,
}

impl RegressionExample {
    pub fn new(query: GroundAtom, target: f64) -> Self {
        Self { query, target, weight: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeParams {
    /// Inner nodes allowed on any root-to-leaf path.
    pub max_depth: usize,
    pub min_examples_leaf: usize,
    pub max_literals_per_test: usize,
    pub candidate_constants_per_position: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self { max_depth: 3, min_examples_leaf: 2, max_literals_per_test: 2, candidate_constants_per_position: 8 }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_examples_leaf == 0 || self.max_literals_per_test == 0 || self.candidate_constants_per_position == 0
        {
            return Err(Error::Config("tree parameters must be positive (min_examples_leaf >= 1)".into()));
        }
        Ok(())
    }
}

/// Computes the value stored at a leaf from the examples that reach it.
pub trait LeafEstimator {
    fn leaf_value(&self, examples: &[RegressionExample], members: &[usize]) -> f64;
}

/// Weighted mean of the targets; 0 for an empty or zero-weight leaf.
#[derive(Copy, Clone, Debug, Default)]
pub struct MeanLeaf;

impl LeafEstimator for MeanLeaf {
    fn leaf_value(&self, examples: &[RegressionExample], members: &[usize]) -> f64 {
        let (mut sw, mut swy) = (0.0, 0.0);
        for &i in members {
            sw += examples[i].weight;
            swy += examples[i].weight * examples[i].target;
        }
        if sw > 0.0 {
            swy / sw
        } else {
            0.0
        }
    }
}

/// LogitBoost leaf for targets that are Bernoulli gradients `y − p`:
/// `Σ w·g / Σ w·|g|·(1 − |g|)`, denominator floored at `1e-6`.
#[derive(Copy, Clone, Debug, Default)]
pub struct LogitLeaf;

impl LogitLeaf {
    pub const DENOMINATOR_FLOOR: f64 = 1e-6;
}

impl LeafEstimator for LogitLeaf {
    fn leaf_value(&self, examples: &[RegressionExample], members: &[usize]) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for &i in members {
            let e = &examples[i];
            let g = e.target;
            let a = libm::fabs(g);
            num += e.weight * g;
            den += e.weight * a * (1.0 - a);
        }
        num / den.max(Self::DENOMINATOR_FLOOR)
    }
}

/// Greedy top-down induction minimizing weighted variance.
///
/// A node becomes a leaf at the depth cap, when it cannot host two leaves of
/// `min_examples_leaf`, when its targets have zero variance, or when no
/// feasible candidate strictly lowers the weighted variance.
pub fn learn_tree(
    examples: &[RegressionExample],
    store: &FactStore,
    lang: &Language,
    params: &TreeParams,
    leaf: &dyn LeafEstimator,
) -> Result<RelationalTree> {
    if examples.is_empty() {
        return Err(Error::NoExamples);
    }
    params.validate()?;
    for e in examples {
        if e.query.pred != lang.target {
            let s = store.schema();
            return Err(Error::PredicateMismatch {
                expected: s.predicate_name(lang.target).into(),
                found: s.predicate_name(e.query.pred).into(),
            });
        }
    }
    let thetas: Vec<Substitution> = examples.iter().map(|e| Substitution::from_args(&e.query.args)).collect();
    let ctx = Grow { examples, thetas: &thetas, store, lang, params, leaf };
    let members: Vec<usize> = (0..examples.len()).collect();
    let mut path = Vec::new();
    let root = ctx.grow(&members, &mut path, 0);
    Ok(RelationalTree::new(lang.target, root))
}

const MIN_GAIN: f64 = 1e-12;

struct Grow<'a> {
    examples: &'a [RegressionExample],
    thetas: &'a [Substitution],
    store: &'a FactStore,
    lang: &'a Language,
    params: &'a TreeParams,
    leaf: &'a dyn LeafEstimator,
}

impl Grow<'_> {
    fn make_leaf(&self, members: &[usize]) -> Node {
        let v = self.leaf.leaf_value(self.examples, members);
        Node::Leaf(Leaf { value: if v.is_finite() { v } else { 0.0 }, n_examples: members.len() })
    }

    fn grow(&self, members: &[usize], path: &mut Vec<Atom>, depth: usize) -> Node {
        let before = weighted_sse(self.examples, members);
        if depth >= self.params.max_depth || members.len() < 2 * self.params.min_examples_leaf || before <= MIN_GAIN {
            return self.make_leaf(members);
        }
        let base = path.len();
        let mut best: Option<(f64, Vec<Atom>, Vec<usize>, Vec<usize>)> = None;
        for cand in refinements(path, self.lang, self.store, self.params) {
            path.extend_from_slice(&cand);
            let s = score_members(path, self.examples, self.thetas, members, self.store, self.params.min_examples_leaf);
            path.truncate(base);
            if !s.feasible {
                continue;
            }
            if best.as_ref().is_none_or(|b| s.weighted_variance < b.0) {
                best = Some((s.weighted_variance, cand, s.on_true, s.on_false));
            }
        }
        match best {
            Some((after, test, on_true, on_false)) if before - after > MIN_GAIN => {
                path.extend_from_slice(&test);
                let t = self.grow(&on_true, path, depth + 1);
                path.truncate(base);
                let f = self.grow(&on_false, path, depth + 1);
                Node::Split(alloc::boxed::Box::new(Split { test, on_true: t, on_false: f }))
            }
            _ => self.make_leaf(members),
        }
    }
}
