//! Numerically stable scalar helpers shared by boosting, sampling and
//! action selection. Everything goes through `libm` so that results are
//! bit-identical across targets.

use alloc::vec::Vec;

/// Logistic function `e^x / (1 + e^x)`, evaluated without overflow.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)`.
pub fn softplus(x: f64) -> f64 {
    let m = if x > 0.0 { x } else { 0.0 };
    m + libm::log1p(libm::exp(-libm::fabs(x)))
}

/// Negative log-likelihood of a Bernoulli observation under potential `psi`.
pub fn bernoulli_nll(psi: f64, positive: bool) -> f64 {
    if positive {
        softplus(-psi)
    } else {
        softplus(psi)
    }
}

/// Log-odds `ln(p / (1 - p))`.
pub fn logit(p: f64) -> f64 {
    libm::log(p / (1.0 - p))
}

/// Softmax of `scores`, shifted by the maximum before exponentiation.
///
/// Returns an empty vector for empty input.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let Some(max) = scores.iter().copied().reduce(f64::max) else {
        return Vec::new();
    };
    let mut out: Vec<f64> = scores.iter().map(|s| libm::exp(s - max)).collect();
    let total: f64 = out.iter().sum();
    for w in &mut out {
        *w /= total;
    }
    out
}

/// Index of the largest value; ties resolve to the lowest index.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Draws an index from a discrete distribution by inverting its CDF against
/// one uniform variate.
pub fn sample_index<R: rand::Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    debug_assert!(!weights.is_empty());
    let total: f64 = weights.iter().sum();
    let u: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    // u landed in the rounding gap at the top; return the last positive weight.
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(weights.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(0.8) - 0.689_974_481_127_612_4).abs() < 1e-12);
        let hi = sigmoid(700.0);
        assert!(hi > 1.0 - 1e-12 && hi <= 1.0);
        assert!(sigmoid(-1000.0) >= 0.0);
        for x in [-30.0, -2.5, 0.1, 4.0, 35.0] {
            assert!((sigmoid(x) + sigmoid(-x) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn softplus_is_stable() {
        assert!((softplus(0.0) - core::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(softplus(1000.0), 1000.0);
        assert!(softplus(-1000.0) >= 0.0 && softplus(-1000.0) < 1e-300);
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[0.2, 0.5, 0.5]), Some(1));
        assert_eq!(argmax(&[]), None);
    }

    #[test]
    fn softmax_handles_large_scores() {
        let w = softmax(&[1e6, 0.0]);
        assert_eq!(w[0], 1.0);
        assert_eq!(w[1], 0.0);
    }
}
