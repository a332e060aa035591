//! Functional gradient boosting of relational regression trees.
//!
//! The model keeps an additive potential `ψ = ψ0 + Σ η·tree(query)` whose
//! sigmoid is the probability that the query atom holds (for the bandit: that
//! the arm in the query earns reward 1). Each boosting iteration fits one tree
//! to the point-wise gradients `indicator − P` of the Bernoulli
//! log-likelihood.

use alloc::vec::Vec;

use crate::logic::{FactStore, GroundAtom, PredId, Substitution};
use crate::math::{bernoulli_nll, sigmoid};
use crate::tilde::{learn_tree, Language, LeafEstimator, LogitLeaf, RegressionExample, RelationalTree, TreeParams};
use crate::{Error, Result};

/// Bounds on the initial potential.
pub const PSI0_CLAMP: f64 = 4.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Stage {
    pub tree: RelationalTree,
    pub eta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoostedModel {
    target: PredId,
    psi0: f64,
    stages: Vec<Stage>,
}

/// A query with its observed 0/1 outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledQuery {
    pub query: GroundAtom,
    pub positive: bool,
}

impl LabeledQuery {
    pub fn new(query: GroundAtom, positive: bool) -> Self {
        Self { query, positive }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradientPoint {
    pub query: GroundAtom,
    pub indicator: bool,
    pub p: f64,
    /// `indicator − p`.
    pub gradient: f64,
}

impl BoostedModel {
    pub fn new(target: PredId, psi0: f64) -> Self {
        Self { target, psi0, stages: Vec::new() }
    }

    pub fn target(&self) -> PredId {
        self.target
    }

    pub fn psi0(&self) -> f64 {
        self.psi0
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn push_stage(&mut self, tree: RelationalTree, eta: f64) -> Result<()> {
        if tree.target != self.target {
            return Err(Error::Config("stage tree has a different target".into()));
        }
        self.stages.push(Stage { tree, eta });
        Ok(())
    }

    fn check(&self, query: &GroundAtom, store: &FactStore) -> Result<()> {
        if query.pred != self.target {
            let s = store.schema();
            return Err(Error::PredicateMismatch {
                expected: s.predicate_name(self.target).into(),
                found: s.predicate_name(query.pred).into(),
            });
        }
        Ok(())
    }

    /// `ψ0 + Σ η·tree(query)`, folded left in stage order.
    pub fn predict_psi(&self, query: &GroundAtom, store: &FactStore) -> Result<f64> {
        self.check(query, store)?;
        Ok(self.psi_continue(0, self.psi0, query, store))
    }

    pub fn predict_prob(&self, query: &GroundAtom, store: &FactStore) -> Result<f64> {
        Ok(sigmoid(self.predict_psi(query, store)?))
    }

    /// Continues the left fold from a partial sum `psi` over stages
    /// `from..`. Callers guarantee the query matches the target.
    pub(crate) fn psi_continue(&self, from: usize, mut psi: f64, query: &GroundAtom, store: &FactStore) -> f64 {
        if from >= self.stages.len() {
            return psi;
        }
        let theta = Substitution::from_args(&query.args);
        for st in &self.stages[from..] {
            psi += st.eta * st.tree.reach_bound(&theta, store).value;
        }
        psi
    }

    /// Total Bernoulli negative log-likelihood over a batch.
    pub fn batch_nll(&self, batch: &[LabeledQuery], store: &FactStore) -> Result<f64> {
        let mut total = 0.0;
        for lq in batch {
            total += bernoulli_nll(self.predict_psi(&lq.query, store)?, lq.positive);
        }
        Ok(total)
    }
}

pub fn compute_gradients(
    model: &BoostedModel,
    batch: &[LabeledQuery],
    store: &FactStore,
) -> Result<Vec<GradientPoint>> {
    batch
        .iter()
        .map(|lq| {
            let p = model.predict_prob(&lq.query, store)?;
            Ok(GradientPoint {
                query: lq.query.clone(),
                indicator: lq.positive,
                p,
                gradient: indicator_value(lq.positive) - p,
            })
        })
        .collect()
}

fn indicator_value(positive: bool) -> f64 {
    if positive {
        1.0
    } else {
        0.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoostParams {
    /// Trees added per call to [`fit_stage`].
    pub trees_per_batch: usize,
    pub eta: f64,
    pub tree: TreeParams,
}

impl Default for BoostParams {
    fn default() -> Self {
        Self { trees_per_batch: 6, eta: 1.0, tree: TreeParams::default() }
    }
}

impl BoostParams {
    pub fn validate(&self) -> Result<()> {
        if self.trees_per_batch == 0 {
            return Err(Error::Config("trees per batch must be >= 1".into()));
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::Config("eta must be positive".into()));
        }
        if !(4..=10).contains(&self.trees_per_batch) {
            log::warn!("trees per batch K={} is outside the usual range 4..=10", self.trees_per_batch);
        }
        self.tree.validate()
    }
}

/// Batch NLL after each inner iteration of a [`fit_stage`] call; entry 0 is
/// the value before the first new tree.
#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    pub nll: Vec<f64>,
}

/// LogitBoost leaf whose step is halved until the region's negative
/// log-likelihood does not increase. The plain Newton step can overshoot
/// badly on confidently wrong, saturated regions.
struct SafeguardedLogitLeaf<'a> {
    psi: &'a [f64],
    positive: &'a [bool],
    eta: f64,
}

impl LeafEstimator for SafeguardedLogitLeaf<'_> {
    fn leaf_value(&self, examples: &[RegressionExample], members: &[usize]) -> f64 {
        let mut step = LogitLeaf.leaf_value(examples, members);
        if !step.is_finite() {
            return 0.0;
        }
        let region = |delta: f64| -> f64 {
            members.iter().map(|&i| bernoulli_nll(self.psi[i] + self.eta * delta, self.positive[i])).sum()
        };
        let base = region(0.0);
        for _ in 0..60 {
            if region(step) <= base {
                return step;
            }
            step *= 0.5;
        }
        0.0
    }
}

/// Appends `params.trees_per_batch` trees, each fit to the gradients of the
/// model as extended by the previous ones.
pub fn fit_stage(
    model: &mut BoostedModel,
    batch: &[LabeledQuery],
    store: &FactStore,
    lang: &Language,
    params: &BoostParams,
) -> Result<FitReport> {
    if batch.is_empty() {
        return Err(Error::NoExamples);
    }
    params.validate()?;
    let mut psi = Vec::with_capacity(batch.len());
    for lq in batch {
        psi.push(model.predict_psi(&lq.query, store)?);
    }
    let positive: Vec<bool> = batch.iter().map(|lq| lq.positive).collect();
    let nll = |psi: &[f64]| -> f64 { psi.iter().zip(&positive).map(|(&s, &y)| bernoulli_nll(s, y)).sum() };
    let mut report = FitReport { nll: alloc::vec![nll(&psi)] };
    for _ in 0..params.trees_per_batch {
        let examples: Vec<RegressionExample> = batch
            .iter()
            .zip(&psi)
            .map(|(lq, &s)| RegressionExample::new(lq.query.clone(), indicator_value(lq.positive) - sigmoid(s)))
            .collect();
        let leaf = SafeguardedLogitLeaf { psi: &psi, positive: &positive, eta: params.eta };
        let tree = learn_tree(&examples, store, lang, &params.tree, &leaf)?;
        for (lq, s) in batch.iter().zip(psi.iter_mut()) {
            *s += params.eta * tree.reach(&lq.query, store)?.value;
        }
        model.push_stage(tree, params.eta)?;
        report.nll.push(nll(&psi));
    }
    Ok(report)
}

/// Clamped log-odds of the positive rate.
pub fn prior_log_odds(logged: &[LabeledQuery]) -> f64 {
    if logged.is_empty() {
        return 0.0;
    }
    let pos = logged.iter().filter(|l| l.positive).count() as f64;
    let neg = logged.len() as f64 - pos;
    libm::log(pos / neg).clamp(-PSI0_CLAMP, PSI0_CLAMP)
}

/// Fresh model with the prior log-odds as `ψ0`, then one [`fit_stage`] on
/// the logged data.
pub fn cold_start(
    logged: &[LabeledQuery],
    store: &FactStore,
    lang: &Language,
    params: &BoostParams,
) -> Result<BoostedModel> {
    if logged.is_empty() {
        return Err(Error::Config("cold start needs logged data".into()));
    }
    let mut model = BoostedModel::new(lang.target, prior_log_odds(logged));
    fit_stage(&mut model, logged, store, lang, params)?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::tiny_domain;

    fn batch(dom: &crate::data::SyntheticDomain) -> Vec<LabeledQuery> {
        let ds = &dom.dataset;
        let arms = ds.arms();
        ds.examples
            .iter()
            .enumerate()
            .map(|(i, ex)| {
                let arm = arms[i % arms.len()];
                LabeledQuery::new(ds.query(&ex.context, arm), ex.labels.contains(&arm))
            })
            .collect()
    }

    #[test]
    fn fresh_model_predicts_one_half() {
        let dom = tiny_domain(10, 0);
        let ds = &dom.dataset;
        let m = BoostedModel::new(ds.target(), 0.0);
        let q = ds.query(&ds.examples[0].context, ds.arms()[0]);
        assert_eq!(m.predict_prob(&q, &ds.store).unwrap(), 0.5);
    }

    #[test]
    fn gradients_are_indicator_minus_probability() {
        let dom = tiny_domain(20, 1);
        let b = batch(&dom);
        let m = BoostedModel::new(dom.dataset.target(), 0.3);
        for g in compute_gradients(&m, &b, &dom.dataset.store).unwrap() {
            let y = if g.indicator { 1.0 } else { 0.0 };
            assert_eq!(g.gradient, y - sigmoid(0.3));
        }
    }

    #[test]
    fn fit_stage_adds_k_trees_and_never_raises_nll() {
        let dom = tiny_domain(40, 2);
        let ds = &dom.dataset;
        let b = batch(&dom);
        let params = BoostParams { trees_per_batch: 5, ..BoostParams::default() };
        let mut m = BoostedModel::new(ds.target(), 0.0);
        let report = fit_stage(&mut m, &b, &ds.store, &ds.language, &params).unwrap();
        assert_eq!(m.len(), 5);
        assert_eq!(report.nll.len(), 6);
        for w in report.nll.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
        let direct = m.batch_nll(&b, &ds.store).unwrap();
        assert!((direct - report.nll[5]).abs() < 1e-9);
    }

    #[test]
    fn prior_is_clamped_log_odds() {
        let dom = tiny_domain(10, 0);
        let q = dom.dataset.query(&dom.dataset.examples[0].context, dom.dataset.arms()[0]);
        let mk = |pos: usize, neg: usize| -> Vec<LabeledQuery> {
            (0..pos)
                .map(|_| LabeledQuery::new(q.clone(), true))
                .chain((0..neg).map(|_| LabeledQuery::new(q.clone(), false)))
                .collect()
        };
        assert!((prior_log_odds(&mk(4, 1)) - libm::log(4.0)).abs() < 1e-15);
        assert_eq!(prior_log_odds(&mk(3, 0)), PSI0_CLAMP);
        assert_eq!(prior_log_odds(&mk(0, 3)), -PSI0_CLAMP);
    }

    #[test]
    fn cold_start_requires_data() {
        let dom = tiny_domain(10, 0);
        let ds = &dom.dataset;
        assert!(cold_start(&[], &ds.store, &ds.language, &BoostParams::default()).is_err());
    }

    #[test]
    fn mismatched_stage_target_is_rejected() {
        let dom = tiny_domain(10, 0);
        let ds = &dom.dataset;
        let other = ds.store.schema().predicate("liked").unwrap();
        let mut m = BoostedModel::new(ds.target(), 0.0);
        assert!(m.push_stage(RelationalTree::constant(other, 1.0), 1.0).is_err());
    }
}
