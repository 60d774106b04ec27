//! Conformal quantiles: the finite-sample order-statistic rule and its
//! weighted generalization with a point mass at `+inf`.
//!
//! Both variants compare unnormalized cumulative weight against
//! `(1 - alpha) * (1 + total_weight)`. With unit weights the cumulative
//! weights are exact integers, so the weighted scan lands on exactly the
//! `ceil((1 + n)(1 - alpha))`-th smallest score.

use alloc::vec::Vec;

use crate::error::{Error, Result};

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// Mass that the finite scores must reach: `(1 - alpha) * (1 + total)`.
///
/// Values within a relative 1e-9 of an integer snap to it, so that decimal
/// miscoverage rates such as 0.7 (stored as 0.69999..) do not push the
/// index one past the rational answer.
pub(crate) fn mass_threshold(alpha: f64, total: f64) -> f64 {
    let raw = (1.0 - alpha) * (1.0 + total);
    let nearest = libm::round(raw);
    if libm::fabs(raw - nearest) <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        raw
    }
}

/// The `ceil((1 + n)(1 - alpha))`-th smallest score, or `+inf` when that
/// index exceeds `n`.
pub fn conformal_quantile(scores: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if scores.is_empty() {
        return Err(Error::Empty("score set"));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("scores"));
    }
    let n = scores.len();
    let k = libm::ceil(mass_threshold(alpha, n as f64)) as usize;
    if k > n {
        return Ok(f64::INFINITY);
    }
    let mut buf = scores.to_vec();
    let (_, kth, _) = buf.select_nth_unstable_by(k.max(1) - 1, f64::total_cmp);
    Ok(*kth)
}

/// Finite non-conformity scores with optional per-score weights.
///
/// The `+inf` point mass is implicit: its weight is 1 before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreDistribution {
    scores: Vec<f64>,
    weights: Option<Vec<f64>>,
}

impl ScoreDistribution {
    pub fn new(scores: Vec<f64>, weights: Option<Vec<f64>>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::Empty("score set"));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite("scores"));
        }
        if let Some(w) = &weights {
            if w.len() != scores.len() {
                return Err(Error::WeightCount {
                    scores: scores.len(),
                    weights: w.len(),
                });
            }
            if let Some(&bad) = w.iter().find(|&&w| !(w > 0.0 && w <= 1.0)) {
                return Err(Error::InvalidWeight(bad));
            }
        }
        Ok(Self { scores, weights })
    }

    pub fn unweighted(scores: Vec<f64>) -> Result<Self> {
        Self::new(scores, None)
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    /// Normalized masses `w_j / (1 + sum w)` followed by the `+inf` mass.
    pub fn normalized(&self) -> (Vec<f64>, f64) {
        let total: f64 = (0..self.len()).map(|i| self.weight(i)).sum();
        let denom = 1.0 + total;
        let masses = (0..self.len()).map(|i| self.weight(i) / denom).collect();
        (masses, 1.0 / denom)
    }
}

/// `(1 - alpha)`-quantile of `sum_j w~_j delta_{S_j} + w~_inf delta_{+inf}`.
pub fn weighted_conformal_quantile(dist: &ScoreDistribution, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let mut order: Vec<usize> = (0..dist.len()).collect();
    order.sort_by(|&a, &b| dist.scores[a].total_cmp(&dist.scores[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| dist.scores[i]).collect();
    let weights: Vec<f64> = order.iter().map(|&i| dist.weight(i)).collect();
    Ok(weighted_quantile_sorted(&sorted, &weights, alpha))
}

/// Scan over scores sorted ascending with aligned weights in `[0, 1]`.
/// Tied scores are accumulated together before the threshold test.
pub(crate) fn weighted_quantile_sorted(sorted: &[f64], weights: &[f64], alpha: f64) -> f64 {
    debug_assert_eq!(sorted.len(), weights.len());
    let total: f64 = weights.iter().sum();
    let threshold = mass_threshold(alpha, total);
    let mut cumulative = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let value = sorted[i];
        while i < sorted.len() && sorted[i] == value {
            cumulative += weights[i];
            i += 1;
        }
        if cumulative >= threshold {
            return value;
        }
    }
    f64::INFINITY
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    /// Sort, accumulate normalized masses, return the first score whose
    /// cumulative mass reaches `1 - alpha`.
    fn brute_force(scores: &[f64], weights: &[f64], alpha: f64) -> f64 {
        let denom = 1.0 + weights.iter().sum::<f64>();
        let mut pairs: Vec<(f64, f64)> = scores
            .iter()
            .copied()
            .zip(weights.iter().map(|w| w / denom))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut candidates: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        candidates.dedup();
        for c in candidates {
            let mass: f64 = pairs.iter().filter(|p| p.0 <= c).map(|p| p.1).sum();
            if mass >= 1.0 - alpha - 1e-12 {
                return c;
            }
        }
        f64::INFINITY
    }

    #[test]
    fn index_rule_examples() {
        let nine: Vec<f64> = (1..=9).map(f64::from).collect();
        assert_eq!(conformal_quantile(&nine, 0.10).unwrap(), 9.0);
        assert_eq!(conformal_quantile(&nine, 0.25).unwrap(), 8.0);
        let seven: Vec<f64> = (1..=7).map(|i| i as f64 / 10.0).collect();
        assert_eq!(conformal_quantile(&seven, 0.25).unwrap(), 0.6);
        assert_eq!(conformal_quantile(&[5.0], 0.10).unwrap(), f64::INFINITY);
    }

    #[test]
    fn weighted_examples() {
        let d = ScoreDistribution::new(vec![1.0, 2.0, 3.0], Some(vec![1.0, 1.0, 1.0])).unwrap();
        assert_eq!(weighted_conformal_quantile(&d, 0.25).unwrap(), 3.0);
        let d = ScoreDistribution::new(vec![10.0], Some(vec![0.01])).unwrap();
        assert_eq!(
            weighted_conformal_quantile(&d, 0.10).unwrap(),
            f64::INFINITY
        );
        let (masses, inf_mass) = d.normalized();
        assert!((inf_mass - 1.0 / 1.01).abs() < 1e-15);
        assert!((masses[0] - 0.01 / 1.01).abs() < 1e-15);
    }

    #[test]
    fn decimal_alpha_does_not_overshoot() {
        // (1 - 0.7) * 10 evaluates to 3.0000000000000004 in f64.
        let scores: Vec<f64> = (1..=9).map(f64::from).collect();
        assert_eq!(conformal_quantile(&scores, 0.7).unwrap(), 3.0);
    }

    #[test]
    fn ties_accumulate_together() {
        let d = ScoreDistribution::new(
            vec![1.0, 2.0, 2.0, 2.0, 9.0],
            Some(vec![0.5, 0.2, 0.2, 0.2, 0.5]),
        )
        .unwrap();
        // total 1.6, threshold 0.5 * 2.6 = 1.3: mass at 1 is 0.5, through the 2s is 1.1, through 9 is 1.6.
        assert_eq!(weighted_conformal_quantile(&d, 0.5).unwrap(), 9.0);
        assert_eq!(brute_force(d.scores(), d.weights().unwrap(), 0.5), 9.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(conformal_quantile(&[], 0.1), Err(Error::Empty("score set")));
        assert_eq!(
            conformal_quantile(&[1.0], 0.0),
            Err(Error::InvalidAlpha(0.0))
        );
        assert_eq!(
            conformal_quantile(&[1.0], 1.0),
            Err(Error::InvalidAlpha(1.0))
        );
        assert!(conformal_quantile(&[f64::NAN], 0.5).is_err());
        assert!(ScoreDistribution::new(vec![1.0], Some(vec![0.0])).is_err());
        assert!(ScoreDistribution::new(vec![1.0], Some(vec![1.5])).is_err());
        assert!(ScoreDistribution::new(vec![1.0, 2.0], Some(vec![1.0])).is_err());
        assert!(ScoreDistribution::new(vec![f64::INFINITY], None).is_err());
        let d = ScoreDistribution::unweighted(vec![1.0]).unwrap();
        assert!(weighted_conformal_quantile(&d, -0.1).is_err());
    }

    fn alpha_grid() -> impl Strategy<Value = f64> {
        (1u32..=19).prop_map(|i| i as f64 * 0.05)
    }

    proptest! {
        #[test]
        fn unit_weights_reduce_to_index_rule(
            scores in prop::collection::vec(-50i32..50, 1..=8),
            alpha in alpha_grid(),
        ) {
            let scores: Vec<f64> = scores.into_iter().map(|s| s as f64 / 4.0).collect();
            let d = ScoreDistribution::new(scores.clone(), Some(vec![1.0; scores.len()])).unwrap();
            prop_assert_eq!(
                weighted_conformal_quantile(&d, alpha).unwrap().to_bits(),
                conformal_quantile(&scores, alpha).unwrap().to_bits()
            );
        }

        #[test]
        fn matches_brute_force(
            pairs in prop::collection::vec((-100.0f64..100.0, 0.001f64..=1.0), 1..=10),
            alpha in alpha_grid(),
        ) {
            let (scores, weights): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let d = ScoreDistribution::new(scores.clone(), Some(weights.clone())).unwrap();
            prop_assert_eq!(weighted_conformal_quantile(&d, alpha).unwrap(), brute_force(&scores, &weights, alpha));
        }

        #[test]
        fn monotone_in_alpha(
            pairs in prop::collection::vec((-100.0f64..100.0, 0.001f64..=1.0), 1..=12),
            a in alpha_grid(),
            b in alpha_grid(),
        ) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let (scores, weights): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            prop_assert!(conformal_quantile(&scores, lo).unwrap() >= conformal_quantile(&scores, hi).unwrap());
            let d = ScoreDistribution::new(scores, Some(weights)).unwrap();
            prop_assert!(weighted_conformal_quantile(&d, lo).unwrap() >= weighted_conformal_quantile(&d, hi).unwrap());
        }

        #[test]
        fn permutation_invariant(
            pairs in prop::collection::vec((-100.0f64..100.0, 0.001f64..=1.0), 1..=12),
            alpha in alpha_grid(),
            rot in 0usize..12,
        ) {
            let mut rotated = pairs.clone();
            let len = rotated.len();
            rotated.rotate_left(rot % len);
            rotated.reverse();
            let (s1, w1): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let (s2, w2): (Vec<f64>, Vec<f64>) = rotated.into_iter().unzip();
            prop_assert_eq!(conformal_quantile(&s1, alpha).unwrap(), conformal_quantile(&s2, alpha).unwrap());
            let d1 = ScoreDistribution::new(s1, Some(w1)).unwrap();
            let d2 = ScoreDistribution::new(s2, Some(w2)).unwrap();
            prop_assert_eq!(weighted_conformal_quantile(&d1, alpha).unwrap(), weighted_conformal_quantile(&d2, alpha).unwrap());
        }
    }
}
