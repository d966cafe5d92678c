//! Train/test splitting by deduplicated uniform index draws.
//!
//! Indices are drawn uniformly with replacement; the training set keeps the
//! first occurrence of each drawn index and the test set is the complement.
//! Two stopping rules are offered: a target training fraction (default 75%)
//! or the legacy fixed draw budget `round(1.5 * round(2N/3)) + 2000`.
//!
//! Indices here are zero-based.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SplitConfig {
    /// Draw until the training set holds `ceil(fraction * N)` distinct indices.
    Fraction(f64),
    /// Fixed draw budget, training fraction left to chance.
    Paper,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig::Fraction(DEFAULT_TRAIN_FRACTION)
    }
}

impl SplitConfig {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SplitConfig::Fraction(f) if !(f > 0.0 && f < 1.0) => {
                Err(Error::InvalidSplit(format!("train fraction {f} outside (0, 1)")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    /// Distinct indices in order of first draw.
    pub train: Vec<usize>,
    /// Complement of `train`, ascending.
    pub test: Vec<usize>,
    pub seed: u64,
}

impl SplitIndices {
    pub fn achieved_fraction(&self) -> f64 {
        self.train.len() as f64 / (self.train.len() + self.test.len()) as f64
    }
}

/// 1 if `x` occurs among the first `k` entries of `seen`, else 0.
pub fn presence_test(x: usize, seen: &[usize], k: usize) -> u8 {
    seen[..k.min(seen.len())].contains(&x) as u8
}

/// Keep the first occurrence of each draw, stopping once `cap` distinct
/// indices are held.
pub fn dedup_draws<I>(draws: I, n_total: usize, cap: usize) -> Vec<usize>
where
    I: IntoIterator<Item = usize>,
{
    let mut seen = vec![false; n_total];
    let mut kept = Vec::with_capacity(cap.min(n_total));
    if cap == 0 {
        return kept;
    }
    for d in draws {
        if !seen[d] {
            seen[d] = true;
            kept.push(d);
            if kept.len() >= cap {
                break;
            }
        }
    }
    kept
}

/// Number of draws made by the fixed-budget rule.
pub fn paper_draw_count(n_total: usize) -> usize {
    let two_thirds = (2.0 * n_total as f64 / 3.0).round();
    (1.5 * two_thirds).round() as usize + 2000
}

/// Deterministic per-repetition seed derived from a master seed.
pub fn derive_seed(master: u64, rep: u64) -> u64 {
    splitmix64(master ^ splitmix64(rep.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Split `0..n_total` into train and test. The test set is never empty: the
/// training set is capped at `n_total - 1`.
pub fn split(n_total: usize, config: SplitConfig, seed: u64) -> Result<SplitIndices> {
    if n_total < 2 {
        return Err(Error::InvalidSplit(format!("need at least 2 rows, got {n_total}")));
    }
    config.validate()?;
    let mut rng = rng_from_seed(seed);
    let cap = n_total - 1;
    let train = match config {
        SplitConfig::Paper => {
            let draws = paper_draw_count(n_total);
            let stream = (0..draws).map(|_| rng.random_range(0..n_total));
            dedup_draws(stream, n_total, cap)
        }
        SplitConfig::Fraction(f) => {
            let target = ((f * n_total as f64).ceil() as usize).clamp(1, cap);
            let stream = std::iter::repeat_with(|| rng.random_range(0..n_total));
            dedup_draws(stream, n_total, target)
        }
    };
    let mut in_train = vec![false; n_total];
    for &i in &train {
        in_train[i] = true;
    }
    let test = (0..n_total).filter(|&i| !in_train[i]).collect();
    Ok(SplitIndices { train, test, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presence_test_checks_prefix_only() {
        let seen = [0, 2, 5, 8];
        assert_eq!(presence_test(5, &seen, 4), 1);
        assert_eq!(presence_test(7, &seen, 4), 0);
        assert_eq!(presence_test(8, &seen, 3), 0);
    }

    #[test]
    fn dedup_keeps_first_occurrence() {
        assert_eq!(dedup_draws([2, 2, 3, 2, 1, 3, 0], 4, 3), vec![2, 3, 1]);
        assert_eq!(dedup_draws([2, 2, 3, 2, 1, 3, 0], 4, 10), vec![2, 3, 1, 0]);
    }

    #[test]
    fn dedup_matches_presence_test_loop() {
        let draws: Vec<usize> = (0..500).map(|i| (i * 7919 + 13) % 97).collect();
        let mut reference = vec![draws[0]];
        for &d in &draws[1..] {
            if presence_test(d, &reference, reference.len()) == 0 {
                reference.push(d);
            }
        }
        assert_eq!(dedup_draws(draws, 97, usize::MAX), reference);
    }

    #[test]
    fn two_rows_split_one_and_one() {
        let s = split(2, SplitConfig::Fraction(0.5), 7).unwrap();
        assert_eq!(s.train.len(), 1);
        assert_eq!(s.test.len(), 1);
        assert_ne!(s.train[0], s.test[0]);
    }

    #[test]
    fn split_is_deterministic_per_seed() {
        let a = split(300, SplitConfig::default(), 42).unwrap();
        let b = split(300, SplitConfig::default(), 42).unwrap();
        let c = split(300, SplitConfig::default(), 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.train, c.train);
    }

    #[test]
    fn fraction_mode_hits_ceiling_target() {
        let s = split(101, SplitConfig::Fraction(0.75), 1).unwrap();
        assert_eq!(s.train.len(), 76);
        assert_eq!(s.test.len(), 25);
    }

    #[test]
    fn paper_mode_keeps_a_test_row_on_small_cohorts() {
        let s = split(10, SplitConfig::Paper, 3).unwrap();
        assert_eq!(s.train.len(), 9);
        assert_eq!(s.test.len(), 1);
    }

    #[test]
    fn paper_draw_budget() {
        assert_eq!(paper_draw_count(10_000), 12_001);
        assert_eq!(paper_draw_count(3), 2003);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(split(1, SplitConfig::default(), 0).is_err());
        assert!(split(10, SplitConfig::Fraction(1.0), 0).is_err());
        assert!(split(10, SplitConfig::Fraction(0.0), 0).is_err());
        assert!(split(10, SplitConfig::Fraction(f64::NAN), 0).is_err());
    }

    #[test]
    fn derived_seeds_differ_across_reps() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|b| derive_seed(9, b)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn split_partitions_all_rows(n in 2usize..400, seed: u64, paper: bool, frac in 0.05f64..0.95) {
                let cfg = if paper { SplitConfig::Paper } else { SplitConfig::Fraction(frac) };
                let s = split(n, cfg, seed).unwrap();
                prop_assert_eq!(s.train.len() + s.test.len(), n);
                prop_assert!(!s.train.is_empty() && !s.test.is_empty());
                let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            }
        }
    }
}
