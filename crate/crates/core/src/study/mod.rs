//! Human-study service: a job queue that hands recognition and probe trials
//! to subjects under a one-trial-per-action-category rule. Completed batches
//! become recognition records.

pub mod client;
pub mod components;
pub mod http;
mod service;

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, ConfigKey, VideoConfig};
use crate::oracle::answer::matches_any;
use crate::oracle::record::TrialResponse;

pub use components::{component_summary, ComponentCountFile, ComponentReport, ComponentResult};
pub use service::{AssignedJob, JobCounts, StudyService};

/// Default time a subject has to answer an assigned job.
pub const DEFAULT_DEADLINE_MS: u64 = 10 * 60 * 1000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StudyError {
    #[error("unknown job {0}")]
    UnknownJob(u64),
    #[error("job {0} is not assigned to this subject")]
    NotAssigned(u64),
    #[error("the deadline for job {0} has passed; the job was reopened")]
    DeadlineExpired(u64),
    #[error("job {0} already has a response")]
    DuplicateSubmission(u64),
    #[error("configuration {id} does not render: {message}")]
    RenderFailure { id: String, message: String },
    #[error("unknown clip {0}")]
    UnknownClip(String),
    #[error("configuration {0} already has jobs for a different subject count")]
    BatchConflict(String),
    #[error("invalid probe: {0}")]
    InvalidProbe(String),
    #[error("configuration {0} has no completed probe trials for every component")]
    Incomplete(String),
    #[error("n_subjects must be at least 1")]
    NoSubjects,
}

impl StudyError {
    pub(crate) fn render(config: &VideoConfig, e: ConfigError) -> Self {
        StudyError::RenderFailure {
            id: config.key().id(),
            message: e.to_string(),
        }
    }
}

/// Source of "now" for deadlines, injectable for tests.
pub trait Clock: Send + Sync {
    fn now_ms(&self) -> u64;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0)
    }
}

/// A clock that only moves when told to.
#[derive(Default)]
pub struct ManualClock {
    ms: AtomicU64,
}

impl ManualClock {
    pub fn new(start_ms: u64) -> Self {
        ManualClock {
            ms: AtomicU64::new(start_ms),
        }
    }

    pub fn advance(&self, ms: u64) {
        self.ms.fetch_add(ms, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now_ms(&self) -> u64 {
        self.ms.load(Ordering::SeqCst)
    }
}

/// A marked point inside a stimulus whose component subjects must name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Probe {
    /// Index into the configuration's retained frames.
    pub frame_position: usize,
    /// Rendered-frame pixel coordinates.
    pub x: u32,
    pub y: u32,
    /// Acceptable labels, e.g. `{arm, hand}`.
    pub component_key: BTreeSet<String>,
    pub component_name: String,
}

impl Probe {
    pub fn validate(&self, config: &VideoConfig) -> Result<(), StudyError> {
        let side = config.rendered_side();
        if self.frame_position >= config.frame_count() {
            return Err(StudyError::InvalidProbe(format!(
                "frame position {} but only {} frames",
                self.frame_position,
                config.frame_count()
            )));
        }
        if self.x as i64 >= side || self.y as i64 >= side {
            return Err(StudyError::InvalidProbe(format!(
                "point ({}, {}) outside a {side}-pixel frame",
                self.x, self.y
            )));
        }
        if self.component_key.is_empty() || self.component_name.trim().is_empty() {
            return Err(StudyError::InvalidProbe("empty component key or name".into()));
        }
        Ok(())
    }

    pub fn matches(&self, free_text: &str) -> bool {
        matches_any(free_text, &self.component_key)
    }

    /// What a subject is shown: the position only, never the labels.
    pub fn marker(&self) -> ProbeMarker {
        ProbeMarker {
            frame_position: self.frame_position,
            x: self.x,
            y: self.y,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeMarker {
    pub frame_position: usize,
    pub x: u32,
    pub y: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobKind {
    Recognition,
    Probe,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum JobState {
    Open,
    Assigned { subject_id: String, deadline_ms: u64 },
    Completed { subject_id: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeResponse {
    pub subject_id: String,
    pub job_id: u64,
    pub config_key: ConfigKey,
    pub component_name: String,
    pub free_text: String,
    pub correct: bool,
    pub timestamp_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StoredResponse {
    Recognition(TrialResponse),
    Probe(ProbeResponse),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelJob {
    pub job_id: u64,
    pub config_key: ConfigKey,
    pub config: VideoConfig,
    pub action_category: String,
    pub kind: JobKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<Probe>,
    pub state: JobState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<StoredResponse>,
}
