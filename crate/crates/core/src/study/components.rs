//! Recognition of internal components from probe trials.

use serde::{Deserialize, Serialize};

use super::StudyError;
use crate::config::ConfigKey;
use crate::eval::stats::GroupStats;
use crate::geometry::Rational;
use crate::oracle::record::exceeds_half;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentResult {
    pub component_name: String,
    pub n_subjects: u32,
    pub n_correct: u32,
    pub rate: Rational,
    /// Strictly more than half the subjects labelled it correctly.
    pub recognized: bool,
}

impl ComponentResult {
    pub fn new(component_name: impl Into<String>, n_subjects: u32, n_correct: u32) -> Result<Self, StudyError> {
        if n_subjects == 0 {
            return Err(StudyError::NoSubjects);
        }
        if n_correct > n_subjects {
            return Err(StudyError::InvalidProbe(format!("{n_correct} correct of {n_subjects}")));
        }
        Ok(ComponentResult {
            component_name: component_name.into(),
            n_subjects,
            n_correct,
            rate: Rational::new(n_correct as i64, n_subjects as i64),
            recognized: exceeds_half(n_correct, n_subjects),
        })
    }

    pub fn rate_f64(&self) -> f64 {
        self.n_correct as f64 / self.n_subjects as f64
    }
}

/// Mean and population SD of component rates.
pub fn component_summary(results: &[ComponentResult]) -> Option<GroupStats> {
    let rates: Vec<f64> = results.iter().map(ComponentResult::rate_f64).collect();
    GroupStats::of(&rates)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub config_key: ConfigKey,
    pub components: Vec<ComponentResult>,
    pub summary: GroupStats,
}

impl ComponentReport {
    pub fn new(config_key: ConfigKey, components: Vec<ComponentResult>) -> Result<Self, StudyError> {
        let summary = component_summary(&components).ok_or_else(|| StudyError::Incomplete(config_key.id()))?;
        Ok(ComponentReport {
            config_key,
            components,
            summary,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentCount {
    pub name: String,
    pub n_correct: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoComponents {
    pub video: String,
    pub components: Vec<ComponentCount>,
}

/// Per-component correct counts for several minimal videos.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentCountFile {
    #[serde(default)]
    pub description: String,
    pub n_subjects: u32,
    pub videos: Vec<VideoComponents>,
}

impl ComponentCountFile {
    pub fn from_json(text: &str) -> Result<Self, StudyError> {
        serde_json::from_str(text).map_err(|e| StudyError::InvalidProbe(e.to_string()))
    }

    /// Results for every component of every video, in file order.
    pub fn results(&self) -> Result<Vec<ComponentResult>, StudyError> {
        self.videos
            .iter()
            .flat_map(|v| {
                v.components
                    .iter()
                    .map(move |c| ComponentResult::new(format!("{}/{}", v.video, c.name), self.n_subjects, c.n_correct))
            })
            .collect()
    }
}
