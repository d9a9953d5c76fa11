//! Evaluation of humans and models on minimal configurations: recognition
//! gaps and their comparison, plus ranking metrics for dataset assembly.

pub mod ap;
pub mod compare;
pub mod dataset;
pub mod gaps;
pub mod stats;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::ConfigKey;
use crate::geometry::Rational;

pub use ap::{average_precision, mine_hard_negatives, HardNegativeRule};
pub use compare::{human_model_comparison, Comparison};
pub use dataset::{assemble_dataset, AssembledDataset, SplitSpec};
pub use gaps::{gap_report, CountFile, GapReport, RateSource, RateTriplet, RatedConfig};
pub use stats::GroupStats;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("no positive examples")]
    NoPositives,
    #[error("minimal configuration {0} has no spatial or no temporal reductions")]
    UnpairedKey(String),
    #[error("configuration {0} appears in both classes")]
    OverlappingKeys(String),
    #[error("human and model reports disagree on minimal configuration {0}")]
    KeyMismatch(String),
    #[error("no model score for configuration {0}")]
    MissingScore(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Positive,
    Negative,
}

/// A labeled configuration with a model's score in [0, 1] and, when known,
/// its human recognition rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredExample {
    pub config_key: ConfigKey,
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub human_rate: Option<Rational>,
    pub model_score: f64,
}

impl ScoredExample {
    pub fn new(config_key: ConfigKey, label: Label, model_score: f64) -> Self {
        ScoredExample {
            config_key,
            label,
            human_rate: None,
            model_score,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.label == Label::Positive
    }
}

/// Rejects scores outside [0, 1] (including NaN).
pub(crate) fn check_scores(examples: &[ScoredExample]) -> Result<(), EvalError> {
    match examples.iter().find(|e| !(0.0..=1.0).contains(&e.model_score)) {
        Some(e) => Err(EvalError::Invalid(format!("score of {} is outside [0, 1]", e.config_key.id()))),
        None => Ok(()),
    }
}
