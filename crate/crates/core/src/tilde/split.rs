use alloc::vec::Vec;

use super::RegressionExample;
use crate::logic::{satisfies, Atom, FactStore, Substitution};

/// Weighted sum of squared deviations from the weighted mean, i.e.
/// `W · Var_w`, accumulated in one pass (West's update).
#[derive(Copy, Clone, Debug, Default)]
pub(crate) struct Moments {
    weight: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub(crate) fn push(&mut self, x: f64, w: f64) {
        if w <= 0.0 {
            return;
        }
        let total = self.weight + w;
        let delta = x - self.mean;
        self.mean += delta * w / total;
        self.m2 += w * delta * (x - self.mean);
        self.weight = total;
    }

    pub(crate) fn sse(&self) -> f64 {
        self.m2.max(0.0)
    }
}

/// `Σ w·(y − ȳ_w)²` over `members` of `examples`.
pub fn weighted_sse(examples: &[RegressionExample], members: &[usize]) -> f64 {
    let mut m = Moments::default();
    for &i in members {
        m.push(examples[i].target, examples[i].weight);
    }
    m.sse()
}

/// Partition induced by one candidate test.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitScore {
    pub on_true: Vec<usize>,
    pub on_false: Vec<usize>,
    /// `Σ_side W_side · Var_w(side)`.
    pub weighted_variance: f64,
    /// False when either side has fewer than the minimum leaf size.
    pub feasible: bool,
}

/// Scores `candidate` appended to `path` over all `examples`.
pub fn score_split(
    path: &[Atom],
    candidate: &[Atom],
    examples: &[RegressionExample],
    store: &FactStore,
    min_examples_leaf: usize,
) -> SplitScore {
    let thetas: Vec<Substitution> = examples.iter().map(|e| Substitution::from_args(&e.query.args)).collect();
    let members: Vec<usize> = (0..examples.len()).collect();
    let mut conj = path.to_vec();
    conj.extend_from_slice(candidate);
    score_members(&conj, examples, &thetas, &members, store, min_examples_leaf)
}

pub(crate) fn score_members(
    conj: &[Atom],
    examples: &[RegressionExample],
    thetas: &[Substitution],
    members: &[usize],
    store: &FactStore,
    min_examples_leaf: usize,
) -> SplitScore {
    let mut on_true = Vec::new();
    let mut on_false = Vec::new();
    let (mut mt, mut mf) = (Moments::default(), Moments::default());
    for &i in members {
        let e = &examples[i];
        if satisfies(conj, &thetas[i], store) {
            on_true.push(i);
            mt.push(e.target, e.weight);
        } else {
            on_false.push(i);
            mf.push(e.target, e.weight);
        }
    }
    let feasible = on_true.len() >= min_examples_leaf && on_false.len() >= min_examples_leaf;
    SplitScore { on_true, on_false, weighted_variance: mt.sse() + mf.sse(), feasible }
}
