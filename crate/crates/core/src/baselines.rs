//! Propositionalized LinUCB.
//!
//! A context is flattened into a binary vector with one column per fact
//! pattern that touches a context entity: the fact's predicate, the position
//! the entity occupies and the constants in the remaining positions. Each
//! arm then keeps an independent ridge regression `A θ = b` and the arm with
//! the highest upper confidence bound `θᵀx + α·sqrt(xᵀA⁻¹x)` is played.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::bandit::{RoundRecord, RunOutput};
use crate::data::{BanditEnvironment, LoggedInteraction};
use crate::logic::{ConstId, FactStore, PredId};
use crate::{Error, Result};

/// Exploration weights of the LinUCB comparison.
pub const ALPHA_PRESETS: [f64; 3] = [0.05, 0.1, 0.4];

/// Default cap on the encoding dimension.
pub const DEFAULT_MAX_DIM: usize = 4096;

/// A fact pattern with the context entity abstracted out.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Template {
    /// Which context argument the entity is.
    pub slot: usize,
    pub pred: PredId,
    /// Position of the entity inside the fact.
    pub position: usize,
    /// The fact's other arguments, in order.
    pub others: Vec<ConstId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureEncoder {
    templates: Vec<Template>,
    index: BTreeMap<Template, usize>,
    bias: bool,
}

impl FeatureEncoder {
    /// Builds the vocabulary from the facts touching `contexts` in `store`,
    /// skipping `exclude` (normally the target predicate). Keeps the
    /// `max_dim` most frequent templates (one fewer with a bias column);
    /// ties resolve in template order.
    pub fn build<'a, I>(store: &FactStore, contexts: I, exclude: Option<PredId>, max_dim: usize, bias: bool) -> Self
    where
        I: IntoIterator<Item = &'a [ConstId]>,
    {
        let mut counts: BTreeMap<Template, u32> = BTreeMap::new();
        for context in contexts {
            let mut seen = Vec::new();
            for_each_template(store, context, exclude, |t| seen.push(t));
            seen.sort();
            seen.dedup();
            for t in seen {
                *counts.entry(t).or_insert(0) += 1;
            }
        }
        let mut ranked: Vec<(Template, u32)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let room = max_dim.saturating_sub(usize::from(bias));
        let templates: Vec<Template> = ranked.into_iter().take(room).map(|(t, _)| t).collect();
        let index = templates.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        Self { templates, index, bias }
    }

    pub fn dim(&self) -> usize {
        self.templates.len() + usize::from(self.bias)
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn has_bias(&self) -> bool {
        self.bias
    }

    /// Binary encoding of `context`; patterns outside the vocabulary are
    /// ignored. The bias column, when present, is last and always 1.
    pub fn encode(&self, context: &[ConstId], store: &FactStore) -> Vec<f64> {
        let mut x = alloc::vec![0.0; self.dim()];
        for_each_template(store, context, None, |t| {
            if let Some(&j) = self.index.get(&t) {
                x[j] = 1.0;
            }
        });
        if self.bias {
            x[self.templates.len()] = 1.0;
        }
        x
    }

    /// One line per column, `index<TAB>pattern`, with `*` for the entity.
    pub fn vocabulary(&self, store: &FactStore) -> String {
        let schema = store.schema();
        let mut out = String::new();
        for (j, t) in self.templates.iter().enumerate() {
            let mut args: Vec<&str> = t.others.iter().map(|&c| schema.constant_name(c)).collect();
            args.insert(t.position, "*");
            let _ = writeln!(out, "{j}\tslot{} {}({})", t.slot, schema.predicate_name(t.pred), args.join(","));
        }
        if self.bias {
            let _ = writeln!(out, "{}\tbias", self.templates.len());
        }
        out
    }
}

fn for_each_template(store: &FactStore, context: &[ConstId], exclude: Option<PredId>, mut f: impl FnMut(Template)) {
    let schema = store.schema();
    for (slot, &entity) in context.iter().enumerate() {
        for (pred, sig) in schema.predicates() {
            if Some(pred) == exclude {
                continue;
            }
            for position in 0..sig.arity() {
                for &id in store.facts_with(pred, position, entity) {
                    let fact = store.fact(id);
                    let others =
                        fact.args.iter().enumerate().filter(|&(i, _)| i != position).map(|(_, &c)| c).collect();
                    f(Template { slot, pred, position, others });
                }
            }
        }
    }
}

/// Ridge-regression state of one arm. `chol` is the lower Cholesky factor of
/// `a`, kept in step with every update.
#[derive(Clone, Debug, PartialEq)]
pub struct LinUcbArm {
    dim: usize,
    a: Vec<f64>,
    chol: Vec<f64>,
    b: Vec<f64>,
    theta: Vec<f64>,
    updates: u64,
}

impl LinUcbArm {
    pub fn new(dim: usize) -> Self {
        let mut a = alloc::vec![0.0; dim * dim];
        for i in 0..dim {
            a[i * dim + i] = 1.0;
        }
        Self { dim, chol: a.clone(), a, b: alloc::vec![0.0; dim], theta: alloc::vec![0.0; dim], updates: 0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major `A`.
    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// `A⁻¹ b`.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// `A += x xᵀ`, `b += r x`.
    pub fn update(&mut self, x: &[f64], reward: bool) -> Result<()> {
        assert_eq!(x.len(), self.dim, "feature dimension mismatch");
        let Some(first) = x.iter().position(|&v| v != 0.0) else {
            return Ok(());
        };
        let d = self.dim;
        for i in first..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in first..d {
                self.a[i * d + j] += x[i] * x[j];
            }
            if reward {
                self.b[i] += x[i];
            }
        }
        self.rank_one_update(x, first)?;
        self.theta = self.solve(&self.b)?;
        self.updates += 1;
        Ok(())
    }

    fn rank_one_update(&mut self, x: &[f64], first: usize) -> Result<()> {
        let d = self.dim;
        let mut w = x.to_vec();
        for k in first..d {
            if w[k] == 0.0 {
                continue;
            }
            let lkk = self.chol[k * d + k];
            let r = libm::hypot(lkk, w[k]);
            if !(r.is_finite() && lkk > 0.0) {
                return Err(Error::NotPositiveDefinite);
            }
            let c = r / lkk;
            let s = w[k] / lkk;
            self.chol[k * d + k] = r;
            for i in k + 1..d {
                let lik = (self.chol[i * d + k] + s * w[i]) / c;
                w[i] = c * w[i] - s * lik;
                self.chol[i * d + k] = lik;
            }
        }
        Ok(())
    }

    /// `L y = x`.
    fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim;
        let mut y = alloc::vec![0.0; d];
        let Some(first) = x.iter().position(|&v| v != 0.0) else {
            return Ok(y);
        };
        for i in first..d {
            let row = &self.chol[i * d..i * d + i];
            let mut acc = x[i];
            for j in first..i {
                acc -= row[j] * y[j];
            }
            let lii = self.chol[i * d + i];
            if !(lii > 0.0) {
                return Err(Error::NotPositiveDefinite);
            }
            y[i] = acc / lii;
        }
        Ok(y)
    }

    /// `A z = x` through the factor.
    pub fn solve(&self, x: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim;
        let mut z = self.forward(x)?;
        for i in (0..d).rev() {
            let mut acc = z[i];
            for j in i + 1..d {
                acc -= self.chol[j * d + i] * z[j];
            }
            z[i] = acc / self.chol[i * d + i];
        }
        Ok(z)
    }

    /// `sqrt(xᵀ A⁻¹ x)`.
    pub fn width(&self, x: &[f64]) -> Result<f64> {
        let y = self.forward(x)?;
        Ok(libm::sqrt(y.iter().map(|v| v * v).sum()))
    }

    pub fn mean(&self, x: &[f64]) -> f64 {
        self.theta.iter().zip(x).map(|(t, v)| t * v).sum()
    }

    pub fn ucb(&self, x: &[f64], alpha: f64) -> Result<f64> {
        Ok(self.mean(x) + alpha * self.width(x)?)
    }

    /// Refactors `A` from scratch; fails iff `A` is not positive definite.
    pub fn check_positive_definite(&self) -> Result<()> {
        cholesky(&self.a, self.dim).map(|_| ())
    }
}

/// Lower Cholesky factor of the row-major `d × d` matrix `a`.
pub fn cholesky(a: &[f64], d: usize) -> Result<Vec<f64>> {
    let mut l = alloc::vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut acc = a[i * d + j];
            for k in 0..j {
                acc -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if !(acc > 0.0) || !acc.is_finite() {
                    return Err(Error::NotPositiveDefinite);
                }
                l[i * d + i] = libm::sqrt(acc);
            } else {
                l[i * d + j] = acc / l[j * d + j];
            }
        }
    }
    Ok(l)
}

/// Arm with the highest UCB; ties resolve to the lowest index.
pub fn linucb_select(arms: &[LinUcbArm], x: &[f64], alpha: f64) -> Result<usize> {
    Ok(linucb_scores(arms, x, alpha)?.0)
}

fn linucb_scores(arms: &[LinUcbArm], x: &[f64], alpha: f64) -> Result<(usize, Vec<f64>)> {
    let scores = arms.iter().map(|a| a.ucb(x, alpha)).collect::<Result<Vec<f64>>>()?;
    Ok((crate::math::argmax(&scores).unwrap_or(0), scores))
}

pub fn linucb_update(arm: &mut LinUcbArm, x: &[f64], reward: bool) -> Result<()> {
    arm.update(x, reward)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinUcbParams {
    pub alpha: f64,
    pub max_dim: usize,
    pub bias: bool,
    /// Online rounds to play.
    pub rounds: usize,
}

impl Default for LinUcbParams {
    fn default() -> Self {
        Self { alpha: 0.1, max_dim: DEFAULT_MAX_DIM, bias: true, rounds: usize::MAX }
    }
}

#[derive(Clone, Debug)]
pub struct LinUcbModel {
    pub encoder: FeatureEncoder,
    pub arms: Vec<LinUcbArm>,
}

/// Warm-starts one ridge per arm on `logged`, then plays the stream
/// deterministically. `p_chosen` records the chosen arm's UCB score.
pub fn run_linucb(
    env: &mut BanditEnvironment,
    params: &LinUcbParams,
    logged: &[LoggedInteraction],
) -> Result<RunOutput<LinUcbModel>> {
    if !(params.alpha >= 0.0) || params.max_dim == 0 {
        return Err(Error::Config("alpha must be >= 0 and max_dim >= 1".into()));
    }
    let contexts: Vec<&[ConstId]> = env.logged_contexts().chain(env.stream_contexts()).collect();
    let encoder = FeatureEncoder::build(env.store(), contexts, Some(env.target()), params.max_dim, params.bias);
    let mut arms: Vec<LinUcbArm> = (0..env.arms().len()).map(|_| LinUcbArm::new(encoder.dim())).collect();
    for entry in logged {
        let x = encoder.encode(&entry.context, env.store());
        arms[entry.arm].update(&x, entry.reward)?;
    }
    let horizon = params.rounds.min(env.num_rounds());
    let mut rounds = Vec::with_capacity(horizon);
    let mut regret = 0u64;
    for t in 0..horizon {
        let context = env.context(t).to_vec();
        let x = encoder.encode(&context, env.store());
        let (arm, scores) = linucb_scores(&arms, &x, params.alpha)?;
        let reward = env.reward(t, arm);
        regret += u64::from(!reward);
        arms[arm].update(&x, reward)?;
        rounds.push(RoundRecord {
            t: t + 1,
            batch: 0,
            context,
            p_chosen: scores[arm],
            arm_probs: scores,
            chosen_arm: arm,
            reward,
            regret_cum: regret,
        });
        env.apply_updates(t + 1)?;
    }
    let truncated = params.rounds != usize::MAX && horizon < params.rounds;
    if truncated {
        log::warn!("environment exhausted after {horizon} rounds");
    }
    Ok(RunOutput { model: LinUcbModel { encoder, arms }, rounds, truncated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::tiny_domain;

    #[test]
    fn untrained_arms_tie_at_alpha() {
        let arms: Vec<LinUcbArm> = (0..3).map(|_| LinUcbArm::new(4)).collect();
        let x = [1.0, 0.0, 0.0, 0.0];
        for a in &arms {
            assert!((a.ucb(&x, 0.4).unwrap() - 0.4).abs() < 1e-15);
        }
        assert_eq!(linucb_select(&arms, &x, 0.4).unwrap(), 0);
    }

    #[test]
    fn zero_vector_update_is_a_no_op() {
        let mut a = LinUcbArm::new(3);
        let before = a.clone();
        a.update(&[0.0; 3], true).unwrap();
        assert_eq!(a, before);
    }

    #[test]
    fn basis_updates_add_counts_to_the_diagonal() {
        let mut a = LinUcbArm::new(3);
        for (i, n) in [(0, 2), (2, 3)] {
            let mut x = [0.0; 3];
            x[i] = 1.0;
            for _ in 0..n {
                a.update(&x, false).unwrap();
            }
        }
        assert_eq!(a.a(), &[3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 4.0]);
        a.check_positive_definite().unwrap();
    }

    #[test]
    fn trained_arm_dominates_with_small_alpha() {
        let mut arms: Vec<LinUcbArm> = (0..3).map(|_| LinUcbArm::new(2)).collect();
        let x = [1.0, 1.0];
        for _ in 0..10 {
            arms[2].update(&x, true).unwrap();
        }
        assert_eq!(linucb_select(&arms, &x, 0.05).unwrap(), 2);
    }

    #[test]
    fn cholesky_rejects_indefinite_matrices() {
        assert!(cholesky(&[1.0, 2.0, 2.0, 1.0], 2).is_err());
        let l = cholesky(&[4.0, 2.0, 2.0, 3.0], 2).unwrap();
        assert_eq!(l, [2.0, 0.0, 1.0, libm::sqrt(2.0)]);
    }

    #[test]
    fn encoder_is_binary_with_trailing_bias() {
        let dom = tiny_domain(30, 0);
        let ds = &dom.dataset;
        let contexts: Vec<&[ConstId]> = ds.examples.iter().map(|e| e.context.as_slice()).collect();
        let enc = FeatureEncoder::build(&ds.store, contexts.iter().copied(), Some(ds.target()), 64, true);
        assert!(enc.dim() <= 64);
        for c in &contexts {
            let x = enc.encode(c, &ds.store);
            assert_eq!(x.len(), enc.dim());
            assert!(x.iter().all(|&v| v == 0.0 || v == 1.0));
            assert_eq!(x[enc.dim() - 1], 1.0);
        }
        assert_eq!(enc.vocabulary(&ds.store).lines().count(), enc.dim());
    }

    #[test]
    fn entity_without_facts_encodes_to_zero() {
        let mut dom = tiny_domain(30, 0);
        let user = dom.dataset.store.schema().type_id("user").unwrap();
        let lonely = dom.dataset.store.schema_mut().constant("nobody", user).unwrap();
        let ds = &dom.dataset;
        let contexts: Vec<&[ConstId]> = ds.examples.iter().map(|e| e.context.as_slice()).collect();
        let enc = FeatureEncoder::build(&ds.store, contexts, Some(ds.target()), 64, false);
        assert!(enc.encode(&[lonely], &ds.store).iter().all(|&v| v == 0.0));
    }
}
