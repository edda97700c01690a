//! Comparing orders against uniformly random orders.
//!
//! Two measures are computed for a set of candidate orders `O` scored next
//! to a sample of random orders `U`:
//!
//! * `p_emp`: the probability that a candidate scores worse (higher) than a
//!   random order, ties counted as one half.
//! * `p_ratio`: `-log2 Φ((μ1 - μ2) / sqrt(σ1² + σ2²))`, a smooth variant
//!   that treats both score samples as normal. Large values mean the
//!   candidates are much better than random.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use libm::erfc;

use crate::dataset::BinaryDataset;
use crate::error::{Error, Result};
use crate::order::Order;
use crate::segmodel::{effective_max_len, independence_score, score_order, SCORE_TOLERANCE};

/// Number of random orders used unless told otherwise.
pub const DEFAULT_RANDOM_ORDERS: usize = 1000;

/// `n_samples` uniform permutations of `0..n_cols`.
///
/// Sample `i` is a Fisher-Yates shuffle driven by stream `i` of a
/// [`ChaCha8Rng`] seeded with `seed`, so each sample is reproducible on its
/// own, independent of how many others are drawn or in which order.
pub fn sample_random_orders(n_cols: usize, n_samples: usize, seed: u64) -> Vec<Order> {
    (0..n_samples)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut perm: Vec<usize> = (0..n_cols).collect();
            perm.shuffle(&mut rng);
            Order::new(perm).expect("shuffle yields a permutation")
        })
        .collect()
}

/// Pairwise estimate of `P(s(o) > s(u)) + P(s(o) = s(u)) / 2`.
pub fn p_emp(scores_candidate: &[f64], scores_random: &[f64]) -> Result<f64> {
    if scores_candidate.is_empty() || scores_random.is_empty() {
        return Err(Error::EmptyScores);
    }
    // sort the random side once, then count by binary search
    let mut sorted = scores_random.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut wins = 0.0;
    for &s in scores_candidate {
        let below = sorted.partition_point(|&u| u < s - SCORE_TOLERANCE);
        let not_above = sorted.partition_point(|&u| u <= s + SCORE_TOLERANCE);
        wins += below as f64 + (not_above - below) as f64 / 2.0;
    }
    Ok(wins / (scores_candidate.len() as f64 * scores_random.len() as f64))
}

/// `p_ratio`, which is unbounded when the normal CDF underflows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PRatio {
    Finite(f64),
    Infinite,
}

impl PRatio {
    pub fn value(self) -> f64 {
        match self {
            PRatio::Finite(v) => v,
            PRatio::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, PRatio::Infinite)
    }
}

impl Serialize for PRatio {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PRatio::Finite(v) => serializer.serialize_f64(*v),
            PRatio::Infinite => serializer.serialize_str("inf"),
        }
    }
}

/// Standard normal CDF via `erfc`, accurate in the tails.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Mean and population standard deviation.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn ratio_from_z(z: f64) -> PRatio {
    let phi = normal_cdf(z);
    if phi <= 0.0 {
        PRatio::Infinite
    } else {
        PRatio::Finite(-phi.log2())
    }
}

/// `-log2 Φ((μ1 - μ2) / sqrt(σ1² + σ2²))`.
pub fn p_ratio(scores_candidate: &[f64], scores_random: &[f64]) -> Result<PRatio> {
    if scores_candidate.is_empty() || scores_random.is_empty() {
        return Err(Error::EmptyScores);
    }
    let (mu1, sd1) = mean_sd(scores_candidate);
    let (mu2, sd2) = mean_sd(scores_random);
    let spread = (sd1 * sd1 + sd2 * sd2).sqrt();
    if spread == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(ratio_from_z((mu1 - mu2) / spread))
}

/// Outcome of comparing a candidate set with random orders on one dataset.
#[derive(Debug, Clone, Serialize)]
pub struct SignificanceReport {
    pub p_emp: f64,
    pub p_ratio: PRatio,
    pub mu1: f64,
    pub mu2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub n_candidates: usize,
    pub n_random: usize,
    /// Score of the all-singletons cover on the same data.
    pub score_independence: f64,
    #[serde(skip)]
    pub scores_candidate: Vec<f64>,
    #[serde(skip)]
    pub scores_random: Vec<f64>,
}

impl SignificanceReport {
    /// Summarizes two score samples.
    ///
    /// When both samples are constant to within [`SCORE_TOLERANCE`],
    /// `p_ratio` takes its limiting value: 1 for equal means, infinite when
    /// the candidates are lower, 0 when they are higher.
    pub fn from_scores(
        scores_candidate: Vec<f64>,
        scores_random: Vec<f64>,
        score_independence: f64,
    ) -> Result<Self> {
        let p_emp = p_emp(&scores_candidate, &scores_random)?;
        let (mu1, sigma1) = mean_sd(&scores_candidate);
        let (mu2, sigma2) = mean_sd(&scores_random);
        let spread = (sigma1 * sigma1 + sigma2 * sigma2).sqrt();
        let p_ratio = if spread <= SCORE_TOLERANCE {
            let diff = mu1 - mu2;
            if diff.abs() <= SCORE_TOLERANCE {
                PRatio::Finite(1.0)
            } else if diff < 0.0 {
                PRatio::Infinite
            } else {
                PRatio::Finite(0.0)
            }
        } else {
            ratio_from_z((mu1 - mu2) / spread)
        };
        Ok(SignificanceReport {
            p_emp,
            p_ratio,
            mu1,
            mu2,
            sigma1,
            sigma2,
            n_candidates: scores_candidate.len(),
            n_random: scores_random.len(),
            score_independence,
            scores_candidate,
            scores_random,
        })
    }
}

/// Scores every order on `ds` in parallel; results keep the input order.
pub fn score_orders(ds: &BinaryDataset, orders: &[Order], max_len: usize) -> Result<Vec<f64>> {
    orders
        .par_iter()
        .map(|o| score_order(ds, o, Some(max_len)).map(|(_, s)| s.total))
        .collect()
}

/// Scores `candidates` and `n_random` random orders on `test` and compares
/// them. Candidates are expected to come from `train` only.
pub fn evaluate_order_set(
    train: &BinaryDataset,
    test: &BinaryDataset,
    candidates: &[Order],
    n_random: usize,
    seed: u64,
    max_len: Option<usize>,
) -> Result<SignificanceReport> {
    let k = test.n_cols();
    if train.n_cols() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: train.n_cols(),
        });
    }
    if let Some(bad) = candidates.iter().find(|o| o.len() != k) {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: bad.len(),
        });
    }
    if candidates.is_empty() || n_random == 0 {
        return Err(Error::EmptyScores);
    }
    let max_len = max_len.unwrap_or_else(|| effective_max_len(test.n_rows(), k));
    let random = sample_random_orders(k, n_random, seed);
    let scores_candidate = score_orders(test, candidates, max_len)?;
    let scores_random = score_orders(test, &random, max_len)?;
    let indep = independence_score(test)?.total;
    SignificanceReport::from_scores(scores_candidate, scores_random, indep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{gen_synthetic, split, SyntheticKind};
    use proptest::prelude::*;
    use std::collections::HashMap;

    #[test]
    fn random_orders_single_column() {
        for o in sample_random_orders(1, 5, 3) {
            assert_eq!(o, Order::identity(1));
        }
    }

    #[test]
    fn random_orders_are_uniform() {
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        for o in sample_random_orders(3, 6000, 17) {
            *counts.entry(o.into_vec()).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        for (perm, c) in counts {
            assert!((900..=1100).contains(&c), "{perm:?}: {c}");
        }
    }

    #[test]
    fn random_orders_are_deterministic() {
        assert_eq!(sample_random_orders(9, 50, 5), sample_random_orders(9, 50, 5));
        assert_ne!(sample_random_orders(9, 50, 5), sample_random_orders(9, 50, 6));
        // each sample depends only on its index
        assert_eq!(sample_random_orders(9, 10, 5)[..], sample_random_orders(9, 50, 5)[..10]);
    }

    #[test]
    fn p_emp_examples() {
        assert_eq!(p_emp(&[3.0], &[3.0]).unwrap(), 0.5);
        assert_eq!(p_emp(&[1.0, 2.0], &[5.0, 6.0, 7.0]).unwrap(), 0.0);
        assert_eq!(p_emp(&[8.0], &[5.0, 6.0, 7.0]).unwrap(), 1.0);
        assert_eq!(p_emp(&[6.0], &[5.0, 6.0 + 1e-9, 7.0]).unwrap(), 0.5);
        assert!(matches!(p_emp(&[], &[1.0]), Err(Error::EmptyScores)));
        assert!(matches!(p_emp(&[1.0], &[]), Err(Error::EmptyScores)));
    }

    #[test]
    fn p_ratio_examples() {
        assert_eq!(p_ratio(&[1.0, 3.0], &[0.0, 4.0]).unwrap(), PRatio::Finite(1.0));
        // one combined standard deviation better: -log2 Φ(-1), Φ(-1) = 0.15865525393145707
        let c = [10.0 - 1.0, 10.0 + 1.0];
        let r = [10.0 + 2f64.sqrt() - 1.0, 10.0 + 2f64.sqrt() + 1.0];
        let v = p_ratio(&c, &r).unwrap().value();
        let expected = -(0.158_655_253_931_457_07f64).log2();
        assert!((v - expected).abs() < 1e-9, "{v}");
        assert!((v - 2.66).abs() < 0.005);
        // 40 standard deviations better underflows
        assert_eq!(p_ratio(&[0.0], &[99.0, 101.0]).unwrap(), PRatio::Infinite);
        assert!(matches!(p_ratio(&[1.0], &[1.0, 1.0]), Err(Error::ZeroVariance)));
    }

    #[test]
    fn normal_cdf_reference_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((normal_cdf(-1.0) / 0.158_655_253_931_457_07 - 1.0).abs() < 1e-12);
        assert!((normal_cdf(-5.0) / 2.866_515_718_791_939e-7 - 1.0).abs() < 1e-12);
        assert!((normal_cdf(-10.0) / 7.619_853_024_160_527e-24 - 1.0).abs() < 1e-12);
        assert_eq!(normal_cdf(-40.0), 0.0);
    }

    #[test]
    fn report_limits_for_constant_scores() {
        let r = SignificanceReport::from_scores(vec![5.0], vec![5.0; 4], 5.0).unwrap();
        assert_eq!(r.p_ratio, PRatio::Finite(1.0));
        assert_eq!(r.p_emp, 0.5);
        let r = SignificanceReport::from_scores(vec![4.0], vec![5.0; 4], 5.0).unwrap();
        assert_eq!(r.p_ratio, PRatio::Infinite);
        let r = SignificanceReport::from_scores(vec![6.0], vec![5.0; 4], 5.0).unwrap();
        assert_eq!(r.p_ratio, PRatio::Finite(0.0));
    }

    #[test]
    fn evaluate_rejects_mismatched_dimensions() {
        let a = gen_synthetic(SyntheticKind::Ind, 4, 20, 0.5, 1).unwrap();
        let b = gen_synthetic(SyntheticKind::Ind, 5, 20, 0.5, 1).unwrap();
        assert!(matches!(
            evaluate_order_set(&a, &b, &[Order::identity(5)], 5, 0, None),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(evaluate_order_set(&b, &b, &[Order::identity(4)], 5, 0, None).is_err());
    }

    #[test]
    fn random_candidates_are_not_significant() {
        let ds = gen_synthetic(SyntheticKind::Path, 10, 2000, 0.25, 8).unwrap();
        let (train, test) = split(&ds, 0.5, 8).unwrap();
        let candidates = sample_random_orders(10, 400, 1_000_001);
        let r = evaluate_order_set(&train, &test, &candidates, 400, 2, None).unwrap();
        assert!((r.p_emp - 0.5).abs() <= 0.05, "{}", r.p_emp);
        assert_eq!(r.n_candidates, 400);
        assert_eq!(r.scores_random.len(), 400);
    }

    #[test]
    fn clust_beats_independence_without_order_structure() {
        let ds = gen_synthetic(SyntheticKind::Clust, 12, 2000, 0.0, 4).unwrap();
        let (train, test) = split(&ds, 0.5, 4).unwrap();
        let candidates = sample_random_orders(12, 50, 77);
        let r = evaluate_order_set(&train, &test, &candidates, 200, 3, None).unwrap();
        let best = r.scores_candidate.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(best < r.score_independence);
        assert!((r.p_emp - 0.5).abs() < 0.15, "{}", r.p_emp);
    }

    fn scores() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(
            prop_oneof![(-1000i32..1000).prop_map(|v| v as f64), -1e4f64..1e4],
            1..40,
        )
    }

    proptest! {
        #[test]
        fn p_emp_is_antisymmetric(a in scores(), b in scores()) {
            let ab = p_emp(&a, &b).unwrap();
            let ba = p_emp(&b, &a).unwrap();
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert!((ab + ba - 1.0).abs() < 1e-12);
        }

        #[test]
        fn measures_are_shift_invariant(a in scores(), b in scores(), shift in -1e3f64..1e3) {
            // integer-valued shift keeps tie structure exact
            let shift = shift.round();
            let sa: Vec<f64> = a.iter().map(|x| x + shift).collect();
            let sb: Vec<f64> = b.iter().map(|x| x + shift).collect();
            prop_assert!((p_emp(&a, &b).unwrap() - p_emp(&sa, &sb).unwrap()).abs() < 1e-12);
            if let (Ok(x), Ok(y)) = (p_ratio(&a, &b), p_ratio(&sa, &sb)) {
                if let (PRatio::Finite(x), PRatio::Finite(y)) = (x, y) {
                    prop_assert!((x - y).abs() < 1e-6 * x.abs().max(1.0));
                }
            }
        }

        #[test]
        fn p_ratio_is_scale_invariant(a in scores(), b in scores(), scale in 0.01f64..100.0) {
            let sa: Vec<f64> = a.iter().map(|x| x * scale).collect();
            let sb: Vec<f64> = b.iter().map(|x| x * scale).collect();
            if let (Ok(PRatio::Finite(x)), Ok(PRatio::Finite(y))) = (p_ratio(&a, &b), p_ratio(&sa, &sb)) {
                prop_assert!((x - y).abs() < 1e-6 * x.abs().max(1.0));
            }
        }

        #[test]
        fn lowering_a_candidate_helps(a in scores(), b in scores(), idx in any::<prop::sample::Index>(), drop in 0.0f64..500.0) {
            let mut lowered = a.clone();
            let i = idx.index(a.len());
            lowered[i] -= drop;
            prop_assert!(p_emp(&lowered, &b).unwrap() <= p_emp(&a, &b).unwrap() + 1e-12);
            if let (Ok(x), Ok(y)) = (p_ratio(&a, &b), p_ratio(&lowered, &b)) {
                // lowering one score can widen σ1; compare only when the
                // candidate side has no spread to begin with
                if a.len() == 1 {
                    prop_assert!(y.value() >= x.value() - 1e-9);
                }
            }
        }
    }
}
