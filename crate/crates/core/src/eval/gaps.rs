//! Recognition-gap statistics over minimal / sub-minimal triplets.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::stats::GroupStats;
use super::EvalError;
use crate::config::ConfigKey;
use crate::geometry::CropRect;
use crate::search::{sub_minimal_set, NodeStatus, SearchNode, SearchTree};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatedConfig {
    pub key: ConfigKey,
    pub rate: f64,
}

/// A minimal configuration paired with one spatial and one temporal
/// sub-minimal configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateTriplet {
    pub minimal: RatedConfig,
    pub spatial: RatedConfig,
    pub temporal: RatedConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateSource {
    Human,
    Model,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripletGap {
    pub minimal: ConfigKey,
    pub spatial_gap: f64,
    pub temporal_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub source: RateSource,
    /// Always `population` (divide by N).
    pub sd_convention: String,
    pub minimal: GroupStats,
    pub spatial: GroupStats,
    pub temporal: GroupStats,
    pub spatial_gap: GroupStats,
    pub temporal_gap: GroupStats,
    pub triplets: Vec<TripletGap>,
}

pub fn gap_report(triplets: &[RateTriplet], source: RateSource) -> Result<GapReport, EvalError> {
    if triplets.is_empty() {
        return Err(EvalError::Invalid("no triplets".into()));
    }
    for t in triplets {
        for r in [&t.minimal, &t.spatial, &t.temporal] {
            if !(0.0..=1.0).contains(&r.rate) {
                return Err(EvalError::Invalid(format!("rate {} of {} outside [0, 1]", r.rate, r.key.id())));
            }
        }
    }
    let column = |f: &dyn Fn(&RateTriplet) -> f64| -> GroupStats {
        let values: Vec<f64> = triplets.iter().map(f).collect();
        GroupStats::of(&values).expect("non-empty")
    };
    Ok(GapReport {
        source,
        sd_convention: "population".into(),
        minimal: column(&|t| t.minimal.rate),
        spatial: column(&|t| t.spatial.rate),
        temporal: column(&|t| t.temporal.rate),
        spatial_gap: column(&|t| t.minimal.rate - t.spatial.rate),
        temporal_gap: column(&|t| t.minimal.rate - t.temporal.rate),
        triplets: triplets
            .iter()
            .map(|t| TripletGap {
                minimal: t.minimal.key.clone(),
                spatial_gap: t.minimal.rate - t.spatial.rate,
                temporal_gap: t.minimal.rate - t.temporal.rate,
            })
            .collect(),
    })
}

impl GapReport {
    /// Plain-text table of the group statistics.
    pub fn summary_table(&self) -> String {
        let mut out = String::new();
        let source = match self.source {
            RateSource::Human => "human",
            RateSource::Model => "model",
        };
        let _ = writeln!(out, "source: {source} ({} triplets, population SD)", self.triplets.len());
        let _ = writeln!(out, "{:<22} {:>6} {:>6}", "group", "mean", "sd");
        let rows = [
            ("minimal", &self.minimal),
            ("spatial sub-minimal", &self.spatial),
            ("temporal sub-minimal", &self.temporal),
            ("gap minimal-spatial", &self.spatial_gap),
            ("gap minimal-temporal", &self.temporal_gap),
        ];
        for (name, s) in rows {
            let _ = writeln!(out, "{name:<22} {:>6.3} {:>6.3}", s.mean, s.sd);
        }
        out
    }
}

fn most_recognized(nodes: &[&SearchNode]) -> Option<RatedConfig> {
    nodes
        .iter()
        .filter_map(|n| n.record.as_ref().map(|r| (n, r.rate_f64())))
        .max_by(|(a, ra), (b, rb)| ra.total_cmp(rb).then_with(|| b.key.cmp(&a.key)))
        .map(|(n, rate)| RatedConfig { key: n.key.clone(), rate })
}

/// Builds one triplet per minimal node of a searched tree, pairing it with
/// its most-recognized spatial and temporal reductions (ties by key).
pub fn triplets_from_tree(tree: &SearchTree) -> Result<Vec<RateTriplet>, EvalError> {
    let mut out = Vec::new();
    for node in tree.nodes().filter(|n| n.status == NodeStatus::Minimal) {
        let set = sub_minimal_set(tree, &node.key).map_err(|e| EvalError::Invalid(e.to_string()))?;
        let rate = node.record.as_ref().map(|r| r.rate_f64()).unwrap_or_default();
        let unpaired = || EvalError::UnpairedKey(node.key.id());
        out.push(RateTriplet {
            minimal: RatedConfig { key: node.key.clone(), rate },
            spatial: most_recognized(&set.spatial).ok_or_else(unpaired)?,
            temporal: most_recognized(&set.temporal).ok_or_else(unpaired)?,
        });
    }
    Ok(out)
}

/// Replaces every rate with the model's score for the same configuration.
pub fn with_model_scores(
    triplets: &[RateTriplet],
    scores: &BTreeMap<ConfigKey, f64>,
) -> Result<Vec<RateTriplet>, EvalError> {
    let rescore = |r: &RatedConfig| -> Result<RatedConfig, EvalError> {
        let rate = *scores.get(&r.key).ok_or_else(|| EvalError::MissingScore(r.key.id()))?;
        Ok(RatedConfig { key: r.key.clone(), rate })
    };
    triplets
        .iter()
        .map(|t| {
            Ok(RateTriplet {
                minimal: rescore(&t.minimal)?,
                spatial: rescore(&t.spatial)?,
                temporal: rescore(&t.temporal)?,
            })
        })
        .collect()
}

/// Correct-response counts for one triplet, as stored in count files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTriplet {
    pub id: String,
    pub minimal: u32,
    pub spatial: u32,
    pub temporal: u32,
}

/// A file of triplet counts sharing one subject count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountFile {
    #[serde(default)]
    pub description: String,
    pub n_subjects: u32,
    pub triplets: Vec<CountTriplet>,
}

impl CountFile {
    pub fn from_json(text: &str) -> Result<Self, EvalError> {
        serde_json::from_str(text).map_err(|e| EvalError::Invalid(e.to_string()))
    }

    /// Converts counts to rates. Each triplet gets placeholder keys under
    /// its id: the minimal config keeps frames 0 and 1 of a 50-pixel ROI,
    /// the spatial one is a resolution step of it, the temporal one drops
    /// frame 1.
    pub fn to_triplets(&self) -> Result<Vec<RateTriplet>, EvalError> {
        if self.n_subjects == 0 {
            return Err(EvalError::Invalid("n_subjects must be at least 1".into()));
        }
        let n = self.n_subjects;
        let rated = |id: &str, frames: Vec<usize>, scale_exp: u32, k: u32| -> Result<RatedConfig, EvalError> {
            if k > n {
                return Err(EvalError::Invalid(format!("{id}: {k} correct of {n}")));
            }
            Ok(RatedConfig {
                key: ConfigKey {
                    clip_id: id.to_string(),
                    frame_indices: frames,
                    crop: CropRect::full(50),
                    scale_exp,
                },
                rate: k as f64 / n as f64,
            })
        };
        self.triplets
            .iter()
            .map(|t| {
                Ok(RateTriplet {
                    minimal: rated(&t.id, vec![0, 1], 0, t.minimal)?,
                    spatial: rated(&t.id, vec![0, 1], 1, t.spatial)?,
                    temporal: rated(&t.id, vec![0], 0, t.temporal)?,
                })
            })
            .collect()
    }
}
