//! Recognition oracles.
//!
//! Every oracle (human pool, remote model, synthetic function) answers with a
//! [`RecognitionRecord`]. Human-backed oracles answer asynchronously: they
//! may return [`Assessment::Pending`] until enough responses have arrived.
//! [`OracleHandle`] wraps any oracle with a per-key cache so each distinct
//! configuration reaches the upstream oracle once per session.

pub mod answer;
pub mod human;
pub mod record;
pub mod synthetic;
pub mod wire;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::config::{ConfigKey, VideoConfig};
use crate::frame::FrameGrid;

pub use answer::{match_description, AnswerKey};
pub use record::{is_recognizable, recognition_rate, RecognitionRecord, TrialResponse};

/// Default number of subjects per configuration.
pub const DEFAULT_SUBJECTS: u32 = 30;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle unavailable: {0}")]
    Unavailable(String),
    #[error("oracle timed out")]
    Timeout,
    #[error("oracle protocol violation: {0}")]
    Protocol(String),
}

/// A rendered configuration ready to be judged.
#[derive(Clone, Debug)]
pub struct Stimulus {
    pub key: ConfigKey,
    pub config: VideoConfig,
    pub frames: Vec<FrameGrid>,
}

impl Stimulus {
    pub fn new(config: VideoConfig, frames: Vec<FrameGrid>) -> Self {
        Stimulus {
            key: config.key(),
            config,
            frames,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Assessment {
    Complete(RecognitionRecord),
    /// Accepted but not yet answered (e.g. human jobs still open).
    Pending,
}

pub trait Oracle: Send + Sync {
    fn assess(&self, stimulus: &Stimulus, n_subjects: u32) -> Result<Assessment, OracleError>;

    /// Judges several stimuli in one round trip. Results are in input order.
    fn assess_batch(&self, stimuli: &[&Stimulus], n_subjects: u32) -> Vec<Result<Assessment, OracleError>> {
        stimuli.iter().map(|s| self.assess(s, n_subjects)).collect()
    }
}

type Slot = Arc<Mutex<Option<RecognitionRecord>>>;

/// Caching, single-flight front for an [`Oracle`].
///
/// Completed records are cached by [`ConfigKey`]; pending answers and errors
/// are not, so the next query asks upstream again. Concurrent queries for the
/// same key serialize on that key's slot and produce one upstream call.
pub struct OracleHandle {
    oracle: Arc<dyn Oracle>,
    slots: Mutex<HashMap<ConfigKey, Slot>>,
    upstream_keys: AtomicU64,
}

impl OracleHandle {
    pub fn new(oracle: impl Oracle + 'static) -> Self {
        Self::from_arc(Arc::new(oracle))
    }

    pub fn from_arc(oracle: Arc<dyn Oracle>) -> Self {
        OracleHandle {
            oracle,
            slots: Mutex::new(HashMap::new()),
            upstream_keys: AtomicU64::new(0),
        }
    }

    /// Number of keys forwarded to the wrapped oracle so far.
    pub fn upstream_calls(&self) -> u64 {
        self.upstream_keys.load(Ordering::SeqCst)
    }

    pub fn cached(&self, key: &ConfigKey) -> Option<RecognitionRecord> {
        let slot = self.slots.lock().unwrap().get(key).cloned()?;
        let guard = slot.lock().unwrap();
        guard.clone()
    }

    pub fn query(&self, stimulus: &Stimulus, n_subjects: u32) -> Result<Assessment, OracleError> {
        self.query_batch(std::slice::from_ref(stimulus), n_subjects)
            .pop()
            .expect("one result per stimulus")
    }

    pub fn query_batch(&self, stimuli: &[Stimulus], n_subjects: u32) -> Vec<Result<Assessment, OracleError>> {
        let mut unique: Vec<&ConfigKey> = stimuli.iter().map(|s| &s.key).collect();
        unique.sort();
        unique.dedup();

        let slots: Vec<(ConfigKey, Slot)> = {
            let mut map = self.slots.lock().unwrap();
            unique
                .iter()
                .map(|&k| (k.clone(), map.entry(k.clone()).or_default().clone()))
                .collect()
        };
        // Lock in key order so overlapping batches cannot deadlock.
        let mut guards: Vec<_> = slots.iter().map(|(k, s)| (k, s.lock().unwrap())).collect();

        let misses: Vec<&Stimulus> = guards
            .iter()
            .filter(|(_, g)| g.is_none())
            .filter_map(|(k, _)| stimuli.iter().find(|s| &s.key == *k))
            .collect();
        let mut fresh: HashMap<ConfigKey, Result<Assessment, OracleError>> = HashMap::new();
        if !misses.is_empty() {
            self.upstream_keys.fetch_add(misses.len() as u64, Ordering::SeqCst);
            let results = self.oracle.assess_batch(&misses, n_subjects);
            for (stimulus, result) in misses.iter().zip(results) {
                fresh.insert(stimulus.key.clone(), result);
            }
        }
        for (key, guard) in guards.iter_mut() {
            if let Some(Ok(Assessment::Complete(record))) = fresh.get(*key) {
                **guard = Some(record.clone());
            }
        }

        stimuli
            .iter()
            .map(|s| {
                let (_, guard) = guards.iter().find(|(k, _)| **k == s.key).expect("slot for every key");
                match guard.as_ref() {
                    Some(record) => Ok(Assessment::Complete(record.clone())),
                    None => fresh
                        .get(&s.key)
                        .cloned()
                        .unwrap_or(Err(OracleError::Unavailable("no answer".into()))),
                }
            })
            .collect()
    }
}
