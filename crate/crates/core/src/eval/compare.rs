//! Side-by-side comparison of human and model recognition gaps.

use serde::{Deserialize, Serialize};

use super::gaps::GapReport;
use super::stats::GroupStats;
use super::EvalError;
use crate::config::ConfigKey;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripletComparison {
    pub minimal: ConfigKey,
    pub human_spatial_gap: f64,
    pub model_spatial_gap: f64,
    /// Human gap minus model gap.
    pub spatial_difference: f64,
    pub human_temporal_gap: f64,
    pub model_temporal_gap: f64,
    pub temporal_difference: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub triplets: Vec<TripletComparison>,
    pub spatial_difference: GroupStats,
    pub temporal_difference: GroupStats,
    /// Triplets in which the human gap is strictly larger than the model's.
    pub spatial_human_exceeds: usize,
    pub temporal_human_exceeds: usize,
    pub human: GapReport,
    pub model: GapReport,
}

/// Pairs two gap reports triplet by triplet. Both must list the same
/// minimal configurations in the same order.
pub fn human_model_comparison(human: &GapReport, model: &GapReport) -> Result<Comparison, EvalError> {
    if human.triplets.len() != model.triplets.len() {
        return Err(EvalError::KeyMismatch(format!(
            "{} human triplets vs {} model triplets",
            human.triplets.len(),
            model.triplets.len()
        )));
    }
    let mut triplets = Vec::with_capacity(human.triplets.len());
    for (h, m) in human.triplets.iter().zip(&model.triplets) {
        if h.minimal != m.minimal {
            return Err(EvalError::KeyMismatch(h.minimal.id()));
        }
        triplets.push(TripletComparison {
            minimal: h.minimal.clone(),
            human_spatial_gap: h.spatial_gap,
            model_spatial_gap: m.spatial_gap,
            spatial_difference: h.spatial_gap - m.spatial_gap,
            human_temporal_gap: h.temporal_gap,
            model_temporal_gap: m.temporal_gap,
            temporal_difference: h.temporal_gap - m.temporal_gap,
        });
    }
    let spatial: Vec<f64> = triplets.iter().map(|t| t.spatial_difference).collect();
    let temporal: Vec<f64> = triplets.iter().map(|t| t.temporal_difference).collect();
    let stats = |v: &[f64]| GroupStats::of(v).ok_or_else(|| EvalError::Invalid("no triplets".into()));
    Ok(Comparison {
        spatial_difference: stats(&spatial)?,
        temporal_difference: stats(&temporal)?,
        spatial_human_exceeds: spatial.iter().filter(|d| **d > 0.0).count(),
        temporal_human_exceeds: temporal.iter().filter(|d| **d > 0.0).count(),
        triplets,
        human: human.clone(),
        model: model.clone(),
    })
}
