//! Ranking metrics and hard-negative mining over scored examples.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{check_scores, EvalError, ScoredExample};

/// Ranking order: score descending, ties broken by configuration key
/// ascending so the result never depends on input order.
pub fn rank_order(a: &ScoredExample, b: &ScoredExample) -> Ordering {
    b.model_score
        .total_cmp(&a.model_score)
        .then_with(|| a.config_key.cmp(&b.config_key))
}

/// Non-interpolated average precision: the mean, over positives, of the
/// precision at each positive's rank.
pub fn average_precision(examples: &[ScoredExample]) -> Result<f64, EvalError> {
    check_scores(examples)?;
    let mut ranked: Vec<&ScoredExample> = examples.iter().collect();
    ranked.sort_by(|a, b| rank_order(a, b));
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, e) in ranked.iter().enumerate() {
        if e.is_positive() {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    if hits == 0 {
        return Err(EvalError::NoPositives);
    }
    Ok(sum / hits as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "value", rename_all = "snake_case")]
pub enum HardNegativeRule {
    /// Negatives scoring at or above a fixed cutoff.
    FixedCutoff(f64),
    /// Negatives scoring at or above the given quantile (0..=1) of the
    /// positive scores, with linear interpolation between order statistics.
    PositiveQuantile(f64),
}

/// Linear-interpolation quantile of an ascending-sorted sample.
pub fn quantile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() || !(0.0..=1.0).contains(&q) {
        return None;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Some(sorted[lo] * (1.0 - frac) + sorted[hi] * frac)
}

/// Slack for the `>=` comparison, so a cutoff obtained by interpolation is
/// not missed by float round-off.
const CUTOFF_SLACK: f64 = 1e-12;

/// Negatives scoring at or above the rule's cutoff, in ranking order.
pub fn mine_hard_negatives(
    examples: &[ScoredExample],
    rule: HardNegativeRule,
) -> Result<Vec<ScoredExample>, EvalError> {
    check_scores(examples)?;
    let cutoff = match rule {
        HardNegativeRule::FixedCutoff(c) => c,
        HardNegativeRule::PositiveQuantile(q) => {
            let mut pos: Vec<f64> = examples.iter().filter(|e| e.is_positive()).map(|e| e.model_score).collect();
            if pos.is_empty() {
                return Err(EvalError::NoPositives);
            }
            pos.sort_by(f64::total_cmp);
            quantile(&pos, q).ok_or_else(|| EvalError::Invalid(format!("quantile {q} outside [0, 1]")))?
        }
    };
    let mut hard: Vec<ScoredExample> = examples
        .iter()
        .filter(|e| !e.is_positive() && e.model_score >= cutoff - CUTOFF_SLACK)
        .cloned()
        .collect();
    hard.sort_by(rank_order);
    Ok(hard)
}
