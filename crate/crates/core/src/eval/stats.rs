//! Descriptive statistics and a seedable permutation test.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Mean and population standard deviation (divide by N) of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

impl GroupStats {
    pub fn of(values: &[f64]) -> Option<GroupStats> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(GroupStats {
            n: values.len(),
            mean,
            sd: var.sqrt(),
        })
    }

    /// `0.71±0.11` style rendering.
    pub fn display(&self) -> String {
        format!("{:.2}±{:.2}", self.mean, self.sd)
    }
}

/// Two-sided permutation test on the difference of means.
///
/// Returns the fraction of label reshuffles (plus the observed split) whose
/// absolute mean difference is at least the observed one.
pub fn permutation_test(a: &[f64], b: &[f64], resamples: usize, seed: u64) -> Option<f64> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let observed = (mean(a) - mean(b)).abs();
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extreme = 1usize;
    for _ in 0..resamples {
        pooled.shuffle(&mut rng);
        let (x, y) = pooled.split_at(a.len());
        if (mean(x) - mean(y)).abs() >= observed - 1e-12 {
            extreme += 1;
        }
    }
    Some(extreme as f64 / (resamples + 1) as f64)
}

/// Correct/total counts of two groups of trials, side by side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProportionReport {
    pub a_correct: u64,
    pub a_total: u64,
    pub b_correct: u64,
    pub b_total: u64,
    pub a_rate: f64,
    pub b_rate: f64,
    pub difference: f64,
    pub pooled_rate: f64,
}

pub fn two_proportion(a_correct: u64, a_total: u64, b_correct: u64, b_total: u64) -> Option<ProportionReport> {
    if a_total == 0 || b_total == 0 || a_correct > a_total || b_correct > b_total {
        return None;
    }
    let a_rate = a_correct as f64 / a_total as f64;
    let b_rate = b_correct as f64 / b_total as f64;
    Some(ProportionReport {
        a_correct,
        a_total,
        b_correct,
        b_total,
        a_rate,
        b_rate,
        difference: a_rate - b_rate,
        pooled_rate: (a_correct + b_correct) as f64 / (a_total + b_total) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn population_sd() {
        let s = GroupStats::of(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).unwrap();
        assert_eq!(s.mean, 5.0);
        assert_eq!(s.sd, 2.0);
        assert!(GroupStats::of(&[]).is_none());
        assert_eq!(GroupStats::of(&[0.3; 4]).unwrap().sd, 0.0);
    }

    #[test]
    fn permutation_separates_distinct_groups() {
        let a = [0.9, 0.8, 0.85, 0.95, 0.7, 0.75, 0.8, 0.9];
        let b = [0.1, 0.2, 0.15, 0.05, 0.3, 0.25, 0.2, 0.1];
        let p = permutation_test(&a, &b, 2000, 1).unwrap();
        assert!(p < 0.01, "p = {p}");
        let same = permutation_test(&a, &a, 500, 1).unwrap();
        assert_eq!(same, 1.0);
        assert_eq!(permutation_test(&a, &b, 300, 5), permutation_test(&a, &b, 300, 5));
    }

    #[test]
    fn proportions() {
        let r = two_proportion(21, 30, 6, 30).unwrap();
        assert!((r.difference - 0.5).abs() < 1e-12);
        assert!((r.pooled_rate - 0.45).abs() < 1e-12);
        assert!(two_proportion(1, 0, 1, 1).is_none());
    }
}
