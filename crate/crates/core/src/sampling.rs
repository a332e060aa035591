//! Mini-batch subsampling of the interaction buffer.
//!
//! Before sampling, repeated ground query atoms are collapsed to their most
//! recent entry. The buffer is then split into rewarded (positive) and
//! unrewarded (negative) entries and up to `k` entries are drawn, half from
//! each side. A side that runs short is taken whole and the other side fills
//! the remaining slots.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::Rng;

use crate::logic::GroundAtom;
use crate::math::{sample_index, softmax};

/// One interaction: the query atom for the chosen arm, its reward and the
/// model probability recorded when the arm was chosen.
#[derive(Clone, Debug, PartialEq)]
pub struct BufferEntry {
    pub query: GroundAtom,
    pub arm: usize,
    pub reward: bool,
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PriorityDistribution {
    pub entries: Vec<BufferEntry>,
    pub probabilities: Vec<f64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Sampler {
    /// Stochastic prioritization.
    Informed,
    /// Hardest entries first, no randomness.
    Greedy,
    /// Uniform without replacement.
    Random,
}

impl Sampler {
    pub fn name(self) -> &'static str {
        match self {
            Sampler::Informed => "informed",
            Sampler::Greedy => "greedy",
            Sampler::Random => "random",
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, buffer: &[BufferEntry], k: usize, rng: &mut R) -> Vec<BufferEntry> {
        match self {
            Sampler::Informed => informed_sample(buffer, k, rng),
            Sampler::Greedy => greedy_sample(buffer, k),
            Sampler::Random => random_sample(buffer, k, rng),
        }
    }
}

impl core::str::FromStr for Sampler {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "informed" => Ok(Sampler::Informed),
            "greedy" => Ok(Sampler::Greedy),
            "random" => Ok(Sampler::Random),
            other => Err(crate::Error::Config(alloc::format!("unknown sampler `{other}`"))),
        }
    }
}

/// Priority exponent of a rewarded entry: `1 − p`.
fn positive_score(e: &BufferEntry) -> f64 {
    1.0 - e.p
}

/// Priority exponent of an unrewarded entry: `p`.
fn negative_score(e: &BufferEntry) -> f64 {
    e.p
}

/// `P(i) ∝ exp(1 − p_i)` over rewarded entries.
pub fn priority_positive(entries: &[BufferEntry]) -> PriorityDistribution {
    let scores: Vec<f64> = entries.iter().map(positive_score).collect();
    PriorityDistribution { entries: entries.to_vec(), probabilities: softmax(&scores) }
}

/// `P(i) ∝ exp(p_i)` over unrewarded entries.
pub fn priority_negative(entries: &[BufferEntry]) -> PriorityDistribution {
    let scores: Vec<f64> = entries.iter().map(negative_score).collect();
    PriorityDistribution { entries: entries.to_vec(), probabilities: softmax(&scores) }
}

/// Keeps the latest entry per ground query, in the order of those latest
/// entries.
pub fn dedup_latest(buffer: &[BufferEntry]) -> Vec<BufferEntry> {
    let mut last: BTreeMap<&GroundAtom, usize> = BTreeMap::new();
    for (i, e) in buffer.iter().enumerate() {
        last.insert(&e.query, i);
    }
    buffer.iter().enumerate().filter(|(i, e)| last[&e.query] == *i).map(|(_, e)| e.clone()).collect()
}

fn split_by_reward(buffer: &[BufferEntry]) -> (Vec<BufferEntry>, Vec<BufferEntry>) {
    dedup_latest(buffer).into_iter().partition(|e| e.reward)
}

/// Per-side quotas for a `k`-sample, moving any shortage to the other side.
fn quotas(k: usize, n_pos: usize, n_neg: usize) -> (usize, usize) {
    let half_pos = k / 2;
    let half_neg = k - half_pos;
    let mut qp = half_pos.min(n_pos);
    let mut qn = half_neg.min(n_neg);
    qp = (qp + (half_neg - qn)).min(n_pos);
    qn = (qn + (k - qp - qn).min(n_neg - qn)).min(n_neg);
    (qp, qn)
}

/// Stochastic prioritization without replacement. Draws alternate between
/// the positive and negative side; priorities are renormalized over the
/// remaining entries after every draw.
pub fn informed_sample<R: Rng + ?Sized>(buffer: &[BufferEntry], k: usize, rng: &mut R) -> Vec<BufferEntry> {
    let (mut pos, mut neg) = split_by_reward(buffer);
    let (mut qp, mut qn) = quotas(k, pos.len(), neg.len());
    let mut out = Vec::with_capacity(qp + qn);
    while qp > 0 || qn > 0 {
        if qp > 0 {
            out.push(draw(&mut pos, positive_score, rng));
            qp -= 1;
        }
        if qn > 0 {
            out.push(draw(&mut neg, negative_score, rng));
            qn -= 1;
        }
    }
    out
}

fn draw<R: Rng + ?Sized>(side: &mut Vec<BufferEntry>, score: fn(&BufferEntry) -> f64, rng: &mut R) -> BufferEntry {
    let scores: Vec<f64> = side.iter().map(score).collect();
    let i = sample_index(&softmax(&scores), rng);
    side.remove(i)
}

/// Deterministic counterpart of [`informed_sample`]: the lowest-`p` positives
/// and the highest-`p` negatives. Ties keep buffer order.
pub fn greedy_sample(buffer: &[BufferEntry], k: usize) -> Vec<BufferEntry> {
    let (mut pos, mut neg) = split_by_reward(buffer);
    let (qp, qn) = quotas(k, pos.len(), neg.len());
    pos.sort_by(|a, b| a.p.total_cmp(&b.p));
    neg.sort_by(|a, b| b.p.total_cmp(&a.p));
    pos.truncate(qp);
    neg.truncate(qn);
    pos.extend(neg);
    pos
}

/// Uniform sample of `min(k, n)` deduplicated entries without replacement.
pub fn random_sample<R: Rng + ?Sized>(buffer: &[BufferEntry], k: usize, rng: &mut R) -> Vec<BufferEntry> {
    let mut pool = dedup_latest(buffer);
    let take = k.min(pool.len());
    // partial Fisher-Yates
    for i in 0..take {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
    }
    pool.truncate(take);
    pool
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{ConstId, PredId};
    use alloc::vec;

    fn entry(id: u32, reward: bool, p: f64) -> BufferEntry {
        BufferEntry { query: GroundAtom::new(PredId(0), vec![ConstId(id)]), arm: 0, reward, p }
    }

    #[test]
    fn quota_shortage_moves_to_other_side() {
        assert_eq!(quotas(8, 10, 10), (4, 4));
        assert_eq!(quotas(8, 1, 10), (1, 7));
        assert_eq!(quotas(8, 10, 2), (6, 2));
        assert_eq!(quotas(8, 2, 3), (2, 3));
        assert_eq!(quotas(7, 10, 10), (3, 4));
        assert_eq!(quotas(4, 0, 0), (0, 0));
    }

    #[test]
    fn priorities_match_closed_form() {
        let d = priority_positive(&[entry(0, true, 0.9), entry(1, true, 0.1)]);
        assert!((d.probabilities[0] - 0.310_025_518_872_387_6).abs() < 1e-12);
        assert!((d.probabilities[1] - 0.689_974_481_127_612_4).abs() < 1e-12);
        let d = priority_negative(&[entry(0, false, 0.9), entry(1, false, 0.1)]);
        assert!((d.probabilities[0] - 0.689_974_481_127_612_4).abs() < 1e-12);
        let d = priority_negative(&[entry(0, false, 0.0), entry(1, false, 0.0), entry(2, false, 0.0)]);
        for p in d.probabilities {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(priority_positive(&[entry(0, true, 0.3)]).probabilities, vec![1.0]);
        assert!(priority_positive(&[]).probabilities.is_empty());
    }

    #[test]
    fn dedup_keeps_latest() {
        let buf = vec![entry(1, true, 0.2), entry(2, false, 0.5), entry(1, true, 0.7)];
        let d = dedup_latest(&buf);
        assert_eq!(d, vec![entry(2, false, 0.5), entry(1, true, 0.7)]);
    }

    #[test]
    fn greedy_picks_hardest() {
        let buf = vec![entry(0, true, 0.1), entry(1, true, 0.9), entry(2, false, 0.1), entry(3, false, 0.9)];
        let s = greedy_sample(&buf, 2);
        assert_eq!(s, vec![entry(0, true, 0.1), entry(3, false, 0.9)]);
    }
}
