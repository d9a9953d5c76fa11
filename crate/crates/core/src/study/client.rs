//! HTTP client for a remote study service.

use std::time::Duration;

use serde::de::DeserializeOwned;

use super::http::{EnqueueRequest, EnqueueResponse, ErrorBody, JobPayload, ResponseSubmission};
use super::StoredResponse;
use crate::config::{ConfigKey, VideoConfig};
use crate::oracle::human::{StudyBackend, StudyStatus};
use crate::oracle::OracleError;

pub struct RemoteStudy {
    base_url: String,
    admin_token: String,
    agent: ureq::Agent,
}

impl RemoteStudy {
    pub fn new(base_url: impl Into<String>, admin_token: impl Into<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(30)))
            .http_status_as_error(false)
            .build()
            .into();
        RemoteStudy {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            admin_token: admin_token.into(),
            agent,
        }
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base_url)
    }

    fn read<R: DeserializeOwned>(mut resp: ureq::http::Response<ureq::Body>) -> Result<R, OracleError> {
        let status = resp.status();
        if status.is_success() {
            return resp
                .body_mut()
                .read_json::<R>()
                .map_err(|e| OracleError::Protocol(e.to_string()));
        }
        let message = resp
            .body_mut()
            .read_json::<ErrorBody>()
            .map(|b| b.error)
            .unwrap_or_else(|_| status.to_string());
        Err(OracleError::Protocol(format!("{}: {message}", status.as_u16())))
    }

    pub fn enqueue_request(&self, request: &EnqueueRequest) -> Result<Vec<u64>, OracleError> {
        let resp = self
            .agent
            .post(self.url("/jobs"))
            .header("Authorization", format!("Bearer {}", self.admin_token))
            .send_json(request)
            .map_err(unavailable)?;
        Ok(Self::read::<EnqueueResponse>(resp)?.job_ids)
    }

    /// Fetches the next job for a subject; `None` when nothing is eligible.
    pub fn next_job(&self, subject: &str) -> Result<Option<JobPayload>, OracleError> {
        let resp = self
            .agent
            .get(self.url("/jobs/next"))
            .query("subject", subject)
            .call()
            .map_err(unavailable)?;
        if resp.status().as_u16() == 204 {
            return Ok(None);
        }
        Self::read(resp).map(Some)
    }

    pub fn submit(&self, job_id: u64, subject: &str, text: &str) -> Result<StoredResponse, OracleError> {
        let body = ResponseSubmission {
            subject: subject.to_string(),
            text: text.to_string(),
        };
        let resp = self
            .agent
            .post(self.url(&format!("/jobs/{job_id}/response")))
            .send_json(&body)
            .map_err(unavailable)?;
        Self::read(resp)
    }

    pub fn config_status(&self, config_id: &str) -> Result<StudyStatus, OracleError> {
        let resp = self
            .agent
            .get(self.url(&format!("/configs/{config_id}/status")))
            .call()
            .map_err(unavailable)?;
        Self::read(resp)
    }
}

fn unavailable(e: ureq::Error) -> OracleError {
    match e {
        ureq::Error::Timeout(_) => OracleError::Timeout,
        other => OracleError::Unavailable(other.to_string()),
    }
}

impl StudyBackend for RemoteStudy {
    fn status(&self, key: &ConfigKey) -> Result<StudyStatus, OracleError> {
        self.config_status(&key.id())
    }

    fn enqueue(&self, config: &VideoConfig, n_subjects: u32) -> Result<(), OracleError> {
        self.enqueue_request(&EnqueueRequest::Recognition {
            configs: vec![config.clone()],
            n_subjects,
        })
        .map(|_| ())
    }
}
