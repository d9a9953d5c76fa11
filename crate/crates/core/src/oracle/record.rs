use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::answer::{match_description, AnswerKey};
use crate::config::ConfigKey;
use crate::geometry::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecordError {
    #[error("no responses to score")]
    EmptyResponses,
    #[error("responses span more than one configuration")]
    MixedConfigs,
    #[error("record needs at least one subject")]
    NoSubjects,
    #[error("{n_correct} correct exceeds {n_subjects} subjects")]
    TooManyCorrect { n_correct: u32, n_subjects: u32 },
}

/// One subject's free-text description of one configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialResponse {
    pub subject_id: String,
    pub config_key: ConfigKey,
    pub free_text: String,
    /// Stored for audit; `recognition_rate` always recomputes it.
    pub correct: bool,
    /// Milliseconds since the Unix epoch.
    pub timestamp_ms: u64,
}

/// Aggregated oracle outcome for one configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawRecord")]
pub struct RecognitionRecord {
    pub config_key: ConfigKey,
    n_subjects: u32,
    n_correct: u32,
}

#[derive(Deserialize)]
struct RawRecord {
    config_key: ConfigKey,
    n_subjects: u32,
    n_correct: u32,
}

impl TryFrom<RawRecord> for RecognitionRecord {
    type Error = RecordError;

    fn try_from(raw: RawRecord) -> Result<Self, Self::Error> {
        RecognitionRecord::new(raw.config_key, raw.n_subjects, raw.n_correct)
    }
}

impl RecognitionRecord {
    pub fn new(config_key: ConfigKey, n_subjects: u32, n_correct: u32) -> Result<Self, RecordError> {
        if n_subjects == 0 {
            return Err(RecordError::NoSubjects);
        }
        if n_correct > n_subjects {
            return Err(RecordError::TooManyCorrect { n_correct, n_subjects });
        }
        Ok(RecognitionRecord {
            config_key,
            n_subjects,
            n_correct,
        })
    }

    /// Converts a fractional recognition score to the nearest subject count.
    pub fn from_score(config_key: ConfigKey, score: f64, n_subjects: u32) -> Result<Self, RecordError> {
        let clamped = score.clamp(0.0, 1.0);
        let n_correct = (clamped * n_subjects as f64).round() as u32;
        RecognitionRecord::new(config_key, n_subjects, n_correct.min(n_subjects))
    }

    pub fn n_subjects(&self) -> u32 {
        self.n_subjects
    }

    pub fn n_correct(&self) -> u32 {
        self.n_correct
    }

    pub fn rate(&self) -> Rational {
        Rational::new(self.n_correct as i64, self.n_subjects as i64)
    }

    pub fn rate_f64(&self) -> f64 {
        self.n_correct as f64 / self.n_subjects as f64
    }

    pub fn is_recognizable(&self) -> bool {
        is_recognizable(self)
    }
}

/// Strictly more than half of the subjects were correct.
pub fn is_recognizable(record: &RecognitionRecord) -> bool {
    exceeds_half(record.n_correct, record.n_subjects)
}

pub(crate) fn exceeds_half(n_correct: u32, n_subjects: u32) -> bool {
    2 * n_correct as u64 > n_subjects as u64
}

pub fn recognition_rate(responses: &[TrialResponse], key: &AnswerKey) -> Result<RecognitionRecord, RecordError> {
    let first = responses.first().ok_or(RecordError::EmptyResponses)?;
    if responses.iter().any(|r| r.config_key != first.config_key) {
        return Err(RecordError::MixedConfigs);
    }
    let n_correct = responses
        .iter()
        .filter(|r| match_description(&r.free_text, key))
        .count();
    RecognitionRecord::new(first.config_key.clone(), responses.len() as u32, n_correct as u32)
}
