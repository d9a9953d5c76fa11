use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::{Arc, Mutex, MutexGuard};

use serde::{Deserialize, Serialize};

use super::components::{ComponentReport, ComponentResult};
use super::{
    Clock, JobKind, JobState, LabelJob, Probe, ProbeResponse, StoredResponse, StudyError, SystemClock,
    DEFAULT_DEADLINE_MS,
};
use crate::config::{render, ConfigKey, VideoConfig};
use crate::frame::{FrameGrid, SourceClip};
use crate::oracle::answer::{match_description, AnswerKey};
use crate::oracle::human::{StudyBackend, StudyStatus};
use crate::oracle::record::{recognition_rate, TrialResponse};
use crate::oracle::{OracleError, RecognitionRecord};

/// A job handed to a subject, with its presentation frames (probe marker
/// already drawn in).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssignedJob {
    pub job: LabelJob,
    pub frames: Vec<FrameGrid>,
    pub deadline_ms: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobCounts {
    pub open: usize,
    pub assigned: usize,
    pub completed: usize,
    pub enqueued: usize,
}

/// Jobs of one configuration sharing a purpose: recognition, or one probe.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct BatchKey {
    config_key: ConfigKey,
    component: Option<String>,
}

struct Batch {
    n_subjects: u32,
    job_ids: Vec<u64>,
    frames: Arc<Vec<FrameGrid>>,
    completed: u32,
    record: Option<RecognitionRecord>,
}

struct Job {
    label: LabelJob,
    batch: BatchKey,
    /// Last subject the job was assigned to, kept after it expires so a
    /// late submission can be told apart from a stranger's.
    last_assignee: Option<String>,
}

#[derive(Default)]
struct State {
    clips: BTreeMap<String, (SourceClip, AnswerKey)>,
    jobs: BTreeMap<u64, Job>,
    open: BTreeSet<u64>,
    batches: BTreeMap<BatchKey, Batch>,
    seen: HashMap<String, BTreeSet<String>>,
    ids: HashMap<String, ConfigKey>,
    subscribers: Vec<Sender<RecognitionRecord>>,
    enqueued: usize,
}

pub struct StudyService {
    state: Mutex<State>,
    clock: Arc<dyn Clock>,
    deadline_ms: u64,
}

impl Default for StudyService {
    fn default() -> Self {
        StudyService::new(Arc::new(SystemClock))
    }
}

impl StudyService {
    pub fn new(clock: Arc<dyn Clock>) -> Self {
        StudyService {
            state: Mutex::new(State::default()),
            clock,
            deadline_ms: DEFAULT_DEADLINE_MS,
        }
    }

    pub fn with_deadline_ms(mut self, deadline_ms: u64) -> Self {
        self.deadline_ms = deadline_ms;
        self
    }

    fn lock(&self) -> MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(|p| p.into_inner())
    }

    /// Registers a clip and the answer key its recognition trials are
    /// scored against.
    pub fn add_clip(&self, clip: SourceClip, answer_key: AnswerKey) {
        self.lock().clips.insert(clip.clip_id().to_string(), (clip, answer_key));
    }

    /// Receives every recognition record as its batch completes.
    pub fn subscribe(&self) -> Receiver<RecognitionRecord> {
        let (tx, rx) = channel();
        self.lock().subscribers.push(tx);
        rx
    }

    /// Opens `n_subjects` recognition jobs per configuration. Enqueueing a
    /// configuration again returns its existing job ids.
    pub fn enqueue_recognition(&self, configs: &[VideoConfig], n_subjects: u32) -> Result<Vec<u64>, StudyError> {
        let mut state = self.lock();
        let mut prepared = Vec::new();
        for config in configs {
            prepared.push((config, None, state.frames_for(config, None)?));
        }
        state.open_batches(prepared, n_subjects)
    }

    /// Opens `n_subjects` probe jobs per probe of one configuration.
    pub fn enqueue_probes(&self, config: &VideoConfig, probes: &[Probe], n_subjects: u32) -> Result<Vec<u64>, StudyError> {
        let mut state = self.lock();
        let mut prepared = Vec::new();
        for probe in probes {
            probe.validate(config)?;
            prepared.push((config, Some(probe), state.frames_for(config, Some(probe))?));
        }
        let names: BTreeSet<&str> = probes.iter().map(|p| p.component_name.as_str()).collect();
        if names.len() != probes.len() {
            return Err(StudyError::InvalidProbe("component names must be distinct".into()));
        }
        state.open_batches(prepared, n_subjects)
    }

    /// Assigns the oldest open job whose action category the subject has not
    /// seen, marking the category seen in the same step.
    pub fn next_job(&self, subject_id: &str) -> Option<AssignedJob> {
        let now = self.clock.now_ms();
        let mut state = self.lock();
        state.sweep(now);
        let seen = state.seen.get(subject_id);
        let job_id = state
            .open
            .iter()
            .copied()
            .find(|id| seen.is_none_or(|s| !s.contains(&state.jobs[id].label.action_category)))?;
        state.open.remove(&job_id);
        let deadline_ms = now.saturating_add(self.deadline_ms);
        let job = state.jobs.get_mut(&job_id).expect("open job exists");
        job.label.state = JobState::Assigned {
            subject_id: subject_id.to_string(),
            deadline_ms,
        };
        job.last_assignee = Some(subject_id.to_string());
        let label = job.label.clone();
        let batch = job.batch.clone();
        state
            .seen
            .entry(subject_id.to_string())
            .or_default()
            .insert(label.action_category.clone());
        let frames = state.batches[&batch].frames.as_ref().clone();
        Some(AssignedJob {
            job: label,
            frames,
            deadline_ms,
        })
    }

    pub fn submit_response(&self, job_id: u64, subject_id: &str, free_text: &str) -> Result<StoredResponse, StudyError> {
        let now = self.clock.now_ms();
        let mut state = self.lock();
        let job = state.jobs.get_mut(&job_id).ok_or(StudyError::UnknownJob(job_id))?;
        match &job.label.state {
            JobState::Assigned { subject_id: s, deadline_ms } if s == subject_id => {
                if now > *deadline_ms {
                    job.label.state = JobState::Open;
                    state.open.insert(job_id);
                    return Err(StudyError::DeadlineExpired(job_id));
                }
            }
            JobState::Completed { subject_id: s } if s == subject_id => {
                return Err(StudyError::DuplicateSubmission(job_id))
            }
            JobState::Open if job.last_assignee.as_deref() == Some(subject_id) => {
                return Err(StudyError::DeadlineExpired(job_id))
            }
            _ => return Err(StudyError::NotAssigned(job_id)),
        }

        let clip_id = job.label.config_key.clip_id.clone();
        let response = match &job.label.probe {
            Some(probe) => StoredResponse::Probe(ProbeResponse {
                subject_id: subject_id.to_string(),
                job_id,
                config_key: job.label.config_key.clone(),
                component_name: probe.component_name.clone(),
                free_text: free_text.to_string(),
                correct: probe.matches(free_text),
                timestamp_ms: now,
            }),
            None => {
                let key = &state.clips.get(&clip_id).ok_or(StudyError::UnknownClip(clip_id.clone()))?.1;
                StoredResponse::Recognition(TrialResponse {
                    subject_id: subject_id.to_string(),
                    config_key: state.jobs[&job_id].label.config_key.clone(),
                    free_text: free_text.to_string(),
                    correct: match_description(free_text, key),
                    timestamp_ms: now,
                })
            }
        };
        let job = state.jobs.get_mut(&job_id).expect("job exists");
        job.label.state = JobState::Completed {
            subject_id: subject_id.to_string(),
        };
        job.label.response = Some(response.clone());
        let batch_key = job.batch.clone();
        state.complete_one(&batch_key);
        Ok(response)
    }

    /// Progress of a configuration's recognition batch.
    pub fn status(&self, key: &ConfigKey) -> StudyStatus {
        let state = self.lock();
        let batch_key = BatchKey {
            config_key: key.clone(),
            component: None,
        };
        match state.batches.get(&batch_key) {
            None => StudyStatus::Unknown,
            Some(b) => match &b.record {
                Some(record) => StudyStatus::Complete { record: record.clone() },
                None => StudyStatus::InProgress {
                    completed: b.completed,
                    n_subjects: b.n_subjects,
                },
            },
        }
    }

    /// Looks up a configuration key by its 16-hex id.
    pub fn key_for_id(&self, id: &str) -> Option<ConfigKey> {
        self.lock().ids.get(id).cloned()
    }

    /// Every emitted recognition record, in key order.
    pub fn records(&self) -> Vec<RecognitionRecord> {
        self.lock().batches.values().filter_map(|b| b.record.clone()).collect()
    }

    pub fn job(&self, job_id: u64) -> Option<LabelJob> {
        self.lock().jobs.get(&job_id).map(|j| j.label.clone())
    }

    pub fn counts(&self) -> JobCounts {
        let state = self.lock();
        let mut counts = JobCounts {
            enqueued: state.enqueued,
            ..JobCounts::default()
        };
        for job in state.jobs.values() {
            match job.label.state {
                JobState::Open => counts.open += 1,
                JobState::Assigned { .. } => counts.assigned += 1,
                JobState::Completed { .. } => counts.completed += 1,
            }
        }
        counts
    }

    pub fn seen_categories(&self, subject_id: &str) -> BTreeSet<String> {
        self.lock().seen.get(subject_id).cloned().unwrap_or_default()
    }

    /// Per-component rates for a configuration's probe batches.
    pub fn component_recognition(&self, key: &ConfigKey) -> Result<ComponentReport, StudyError> {
        let state = self.lock();
        let mut results = Vec::new();
        for (bk, batch) in state.batches.range(
            BatchKey {
                config_key: key.clone(),
                component: Some(String::new()),
            }..,
        ) {
            if &bk.config_key != key {
                break;
            }
            let Some(name) = &bk.component else { continue };
            if batch.completed < batch.n_subjects {
                return Err(StudyError::Incomplete(key.id()));
            }
            let n_correct = batch
                .job_ids
                .iter()
                .filter(|id| {
                    matches!(&state.jobs[id].label.response, Some(StoredResponse::Probe(r)) if r.correct)
                })
                .count() as u32;
            results.push(ComponentResult::new(name.clone(), batch.n_subjects, n_correct)?);
        }
        if results.is_empty() {
            return Err(StudyError::Incomplete(key.id()));
        }
        ComponentReport::new(key.clone(), results)
    }
}

impl State {
    fn frames_for(&self, config: &VideoConfig, probe: Option<&Probe>) -> Result<Arc<Vec<FrameGrid>>, StudyError> {
        let (clip, _) = self
            .clips
            .get(&config.clip_id)
            .ok_or_else(|| StudyError::UnknownClip(config.clip_id.clone()))?;
        let mut frames = render(config, clip).map_err(|e| StudyError::render(config, e))?;
        if let Some(p) = probe {
            burn_marker(&mut frames[p.frame_position], p.x, p.y);
        }
        Ok(Arc::new(frames))
    }

    fn open_batches(
        &mut self,
        prepared: Vec<(&VideoConfig, Option<&Probe>, Arc<Vec<FrameGrid>>)>,
        n_subjects: u32,
    ) -> Result<Vec<u64>, StudyError> {
        if n_subjects == 0 {
            return Err(StudyError::NoSubjects);
        }
        // Check every batch before opening any, so a failure changes nothing.
        for (config, probe, _) in &prepared {
            let bk = BatchKey {
                config_key: config.key(),
                component: probe.map(|p| p.component_name.clone()),
            };
            if self.batches.get(&bk).is_some_and(|b| b.n_subjects != n_subjects) {
                return Err(StudyError::BatchConflict(bk.config_key.id()));
            }
        }
        let mut out = Vec::new();
        for (config, probe, frames) in prepared {
            let key = config.key();
            let bk = BatchKey {
                config_key: key.clone(),
                component: probe.map(|p| p.component_name.clone()),
            };
            if let Some(existing) = self.batches.get(&bk) {
                out.extend(&existing.job_ids);
                continue;
            }
            let category = self.clips[&config.clip_id].0.action_category().to_string();
            let first = self.jobs.last_key_value().map_or(1, |(id, _)| id + 1);
            let job_ids: Vec<u64> = (first..first + n_subjects as u64).collect();
            for &job_id in &job_ids {
                let label = LabelJob {
                    job_id,
                    config_key: key.clone(),
                    config: config.clone(),
                    action_category: category.clone(),
                    kind: if probe.is_some() { JobKind::Probe } else { JobKind::Recognition },
                    probe: probe.cloned(),
                    state: JobState::Open,
                    response: None,
                };
                self.jobs.insert(
                    job_id,
                    Job {
                        label,
                        batch: bk.clone(),
                        last_assignee: None,
                    },
                );
                self.open.insert(job_id);
            }
            self.enqueued += job_ids.len();
            self.ids.insert(key.id(), key);
            out.extend(&job_ids);
            self.batches.insert(
                bk,
                Batch {
                    n_subjects,
                    job_ids,
                    frames,
                    completed: 0,
                    record: None,
                },
            );
        }
        Ok(out)
    }

    /// Reopens assignments whose deadline has passed.
    fn sweep(&mut self, now: u64) {
        for (id, job) in self.jobs.iter_mut() {
            if let JobState::Assigned { deadline_ms, .. } = job.label.state {
                if now > deadline_ms {
                    job.label.state = JobState::Open;
                    self.open.insert(*id);
                }
            }
        }
    }

    fn complete_one(&mut self, bk: &BatchKey) {
        let batch = self.batches.get_mut(bk).expect("batch exists");
        batch.completed += 1;
        if batch.completed < batch.n_subjects || bk.component.is_some() || batch.record.is_some() {
            return;
        }
        let responses: Vec<TrialResponse> = batch
            .job_ids
            .iter()
            .filter_map(|id| match &self.jobs[id].label.response {
                Some(StoredResponse::Recognition(r)) => Some(r.clone()),
                _ => None,
            })
            .collect();
        let key = &self.clips[&bk.config_key.clip_id].1;
        let record = recognition_rate(&responses, key).expect("a full batch of responses for one config");
        let batch = self.batches.get_mut(bk).expect("batch exists");
        batch.record = Some(record.clone());
        self.subscribers.retain(|tx| tx.send(record.clone()).is_ok());
    }
}

/// Draws a 3x3 marker centred on `(x, y)`, inverting each pixel to the far
/// end of the gray scale so it stands out on any background.
pub(crate) fn burn_marker(frame: &mut FrameGrid, x: u32, y: u32) {
    for dy in -1i64..=1 {
        for dx in -1i64..=1 {
            let (px, py) = (x as i64 + dx, y as i64 + dy);
            if px < 0 || py < 0 || px >= frame.width() as i64 || py >= frame.height() as i64 {
                continue;
            }
            let v = frame.get(px as u32, py as u32);
            frame.set(px as u32, py as u32, if v < 128 { 255 } else { 0 });
        }
    }
}

impl StudyBackend for StudyService {
    fn status(&self, key: &ConfigKey) -> Result<StudyStatus, OracleError> {
        Ok(StudyService::status(self, key))
    }

    fn enqueue(&self, config: &VideoConfig, n_subjects: u32) -> Result<(), OracleError> {
        self.enqueue_recognition(std::slice::from_ref(config), n_subjects)
            .map(|_| ())
            .map_err(|e| OracleError::Unavailable(e.to_string()))
    }
}

impl<T: StudyBackend + ?Sized> StudyBackend for Arc<T> {
    fn status(&self, key: &ConfigKey) -> Result<StudyStatus, OracleError> {
        (**self).status(key)
    }

    fn enqueue(&self, config: &VideoConfig, n_subjects: u32) -> Result<(), OracleError> {
        (**self).enqueue(config, n_subjects)
    }
}
