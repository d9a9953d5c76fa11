//! Client for the model-oracle wire protocol.
//!
//! `POST {url}/score` takes one [`ScoreRequest`] and answers one
//! [`ScoreResponse`]; `POST {url}/score_batch` takes and answers JSON arrays
//! of the same documents, in order. Frames travel as base64 grayscale PNGs.

use std::path::Path;
use std::time::Duration;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{Assessment, Oracle, OracleError, RecognitionRecord, Stimulus};
use crate::io::png::{decode_png, encode_png};
use crate::io::IoError;
use crate::frame::FrameGrid;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub config_id: String,
    pub fps: u32,
    /// Base64-encoded grayscale PNGs, one per retained frame.
    pub frames: Vec<String>,
}

impl ScoreRequest {
    pub fn from_stimulus(stimulus: &Stimulus) -> Result<Self, IoError> {
        Ok(ScoreRequest {
            config_id: stimulus.key.id(),
            fps: stimulus.config.fps,
            frames: stimulus
                .frames
                .iter()
                .map(|f| encode_png(f).map(|png| STANDARD.encode(png)))
                .collect::<Result<_, _>>()?,
        })
    }

    pub fn decode_frames(&self) -> Result<Vec<FrameGrid>, IoError> {
        self.frames
            .iter()
            .map(|b64| {
                let bytes = STANDARD
                    .decode(b64)
                    .map_err(|e| IoError::BadImage(format!("frames: {e}")))?;
                decode_png(&bytes)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub config_id: String,
    pub score: f64,
    pub label: String,
    /// Optional ranked label list; stored but never required.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_labels: Option<Vec<String>>,
}

impl ScoreResponse {
    fn validate(&self, expected_id: &str) -> Result<(), OracleError> {
        if self.config_id != expected_id {
            return Err(OracleError::Protocol(format!(
                "expected config_id {expected_id}, got {}",
                self.config_id
            )));
        }
        if !(0.0..=1.0).contains(&self.score) {
            return Err(OracleError::Protocol(format!("score {} outside [0, 1]", self.score)));
        }
        Ok(())
    }
}

fn default_timeout_ms() -> u64 {
    30_000
}

fn default_retries() -> u32 {
    2
}

fn default_batch() -> bool {
    true
}

/// Connection settings, usually read from a TOML file:
///
/// ```toml
/// url = "http://127.0.0.1:8700"
/// timeout_ms = 30000
/// retries = 2
/// batch = true
/// ```
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireConfig {
    pub url: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default = "default_batch")]
    pub batch: bool,
}

impl WireConfig {
    pub fn new(url: impl Into<String>) -> Self {
        WireConfig {
            url: url.into(),
            timeout_ms: default_timeout_ms(),
            retries: default_retries(),
            batch: default_batch(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, IoError> {
        toml::from_str(text).map_err(|e| IoError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path).map_err(|e| IoError::Read {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text)
    }
}

pub struct WireOracle {
    config: WireConfig,
    agent: ureq::Agent,
}

impl WireOracle {
    pub fn new(config: WireConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(config.timeout_ms)))
            .http_status_as_error(true)
            .build()
            .into();
        WireOracle { config, agent }
    }

    fn endpoint(&self, path: &str) -> String {
        format!("{}/{}", self.config.url.trim_end_matches('/'), path)
    }

    fn post<T: Serialize, R: serde::de::DeserializeOwned>(&self, path: &str, body: &T) -> Result<R, OracleError> {
        let url = self.endpoint(path);
        let mut last = OracleError::Unavailable("no attempt made".into());
        for _ in 0..=self.config.retries {
            match self.agent.post(&url).send_json(body) {
                Ok(mut resp) => {
                    return resp
                        .body_mut()
                        .read_json::<R>()
                        .map_err(|e| OracleError::Protocol(e.to_string()))
                }
                Err(ureq::Error::Timeout(_)) => last = OracleError::Timeout,
                Err(ureq::Error::StatusCode(code)) if (400..500).contains(&code) => {
                    return Err(OracleError::Protocol(format!("{url} answered {code}")))
                }
                Err(e) => last = OracleError::Unavailable(e.to_string()),
            }
        }
        Err(last)
    }

    fn to_record(stimulus: &Stimulus, resp: &ScoreResponse, n_subjects: u32) -> Result<Assessment, OracleError> {
        resp.validate(&stimulus.key.id())?;
        RecognitionRecord::from_score(stimulus.key.clone(), resp.score, n_subjects)
            .map(Assessment::Complete)
            .map_err(|e| OracleError::Protocol(e.to_string()))
    }
}

fn request_for(stimulus: &Stimulus) -> Result<ScoreRequest, OracleError> {
    ScoreRequest::from_stimulus(stimulus).map_err(|e| OracleError::Protocol(e.to_string()))
}

impl Oracle for WireOracle {
    fn assess(&self, stimulus: &Stimulus, n_subjects: u32) -> Result<Assessment, OracleError> {
        let resp: ScoreResponse = self.post("score", &request_for(stimulus)?)?;
        Self::to_record(stimulus, &resp, n_subjects)
    }

    fn assess_batch(&self, stimuli: &[&Stimulus], n_subjects: u32) -> Vec<Result<Assessment, OracleError>> {
        if !self.config.batch || stimuli.len() < 2 {
            return stimuli.iter().map(|s| self.assess(s, n_subjects)).collect();
        }
        let requests: Result<Vec<ScoreRequest>, _> = stimuli.iter().map(|s| request_for(s)).collect();
        let outcome = requests.and_then(|reqs| self.post::<_, Vec<ScoreResponse>>("score_batch", &reqs));
        match outcome {
            Ok(responses) if responses.len() == stimuli.len() => stimuli
                .iter()
                .zip(&responses)
                .map(|(s, r)| Self::to_record(s, r, n_subjects))
                .collect(),
            Ok(responses) => {
                let err = OracleError::Protocol(format!(
                    "batch of {} answered with {} responses",
                    stimuli.len(),
                    responses.len()
                ));
                vec![Err(err); stimuli.len()]
            }
            Err(e) => vec![Err(e); stimuli.len()],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults() {
        let cfg = WireConfig::from_toml("url = \"http://localhost:1\"\n").unwrap();
        assert_eq!(cfg, WireConfig::new("http://localhost:1"));
        let cfg = WireConfig::from_toml("url = \"x\"\ntimeout_ms = 5\nretries = 0\nbatch = false\n").unwrap();
        assert_eq!((cfg.timeout_ms, cfg.retries, cfg.batch), (5, 0, false));
    }

    #[test]
    fn response_validation() {
        let ok = ScoreResponse {
            config_id: "a".into(),
            score: 0.5,
            label: "rowing".into(),
            top_labels: None,
        };
        assert!(ok.validate("a").is_ok());
        assert!(ok.validate("b").is_err());
        let bad = ScoreResponse { score: 1.5, ..ok };
        assert!(bad.validate("a").is_err());
    }

    #[test]
    fn unreachable_server_is_unavailable() {
        let oracle = WireOracle::new(WireConfig {
            url: "http://127.0.0.1:9".into(),
            timeout_ms: 500,
            retries: 0,
            batch: true,
        });
        let clip = crate::frame::SourceClip::new("c", vec![FrameGrid::filled(4, 4, 0)], "r", "r").unwrap();
        let root = crate::config::make_root(&clip).unwrap();
        let s = Stimulus::new(root, clip.frames().to_vec());
        assert!(matches!(
            oracle.assess(&s, 30),
            Err(OracleError::Unavailable(_)) | Err(OracleError::Timeout)
        ));
    }
}
