//! Oracle backed by the human-study service.
//!
//! The first query for a configuration enqueues its recognition jobs and
//! answers [`Assessment::Pending`]; later queries return the record once
//! every subject has responded.

use serde::{Deserialize, Serialize};

use super::{Assessment, Oracle, OracleError, RecognitionRecord, Stimulus};
use crate::config::{ConfigKey, VideoConfig};

/// Progress of one configuration's recognition jobs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum StudyStatus {
    Unknown,
    InProgress { completed: u32, n_subjects: u32 },
    Complete { record: RecognitionRecord },
}

/// What the human oracle needs from a study service (local or remote).
pub trait StudyBackend: Send + Sync {
    fn status(&self, key: &ConfigKey) -> Result<StudyStatus, OracleError>;
    fn enqueue(&self, config: &VideoConfig, n_subjects: u32) -> Result<(), OracleError>;
}

pub struct HumanOracle<B> {
    backend: B,
}

impl<B: StudyBackend> HumanOracle<B> {
    pub fn new(backend: B) -> Self {
        HumanOracle { backend }
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }
}

impl<B: StudyBackend> Oracle for HumanOracle<B> {
    fn assess(&self, stimulus: &Stimulus, n_subjects: u32) -> Result<Assessment, OracleError> {
        match self.backend.status(&stimulus.key)? {
            StudyStatus::Complete { record } => Ok(Assessment::Complete(record)),
            StudyStatus::InProgress { .. } => Ok(Assessment::Pending),
            StudyStatus::Unknown => {
                self.backend.enqueue(&stimulus.config, n_subjects)?;
                Ok(Assessment::Pending)
            }
        }
    }
}
