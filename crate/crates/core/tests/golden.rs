//! Golden wire documents: the model oracle and study HTTP payloads must
//! serialize to exactly the bytes stored under `fixtures/`.
//!
//! Set `MINVID_BLESS=1` to rewrite the files after an intentional change.

mod common;

use std::sync::Arc;

use common::{fixture, golden_clip};
use minvid::config::make_root;
use minvid::oracle::human::StudyStatus;
use minvid::oracle::wire::{ScoreRequest, ScoreResponse};
use minvid::oracle::{AnswerKey, Stimulus};
use minvid::reduction::crop_corner;
use minvid::study::http::{EnqueueRequest, EnqueueResponse, JobPayload, ResponseSubmission};
use minvid::study::{ManualClock, Probe, StoredResponse, StudyService};
use minvid::{render, Corner, SourceClip, VideoConfig};
use serde::de::DeserializeOwned;
use serde::Serialize;

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).unwrap();
    s.push('\n');
    s
}

/// Compares `value` against the stored document byte for byte, then checks
/// that parsing the document and re-serializing it is also exact.
fn golden<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(rel: &str, value: &T) {
    let path = fixture(rel);
    let text = pretty(value);
    if std::env::var_os("MINVID_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &text).unwrap();
    }
    let stored = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(text, stored, "{rel} drifted");
    let parsed: T = serde_json::from_str(&stored).unwrap();
    assert_eq!(&parsed, value);
    assert_eq!(pretty(&parsed), stored);
}

fn clip() -> SourceClip {
    golden_clip()
}

fn stimulus(config: &VideoConfig, clip: &SourceClip) -> Stimulus {
    Stimulus::new(config.clone(), render(config, clip).unwrap())
}

fn configs(clip: &SourceClip) -> (VideoConfig, VideoConfig) {
    let root = make_root(clip).unwrap();
    let tl = crop_corner(&root, Corner::TopLeft, 4).unwrap();
    (root, tl)
}

#[test]
fn wire_score_documents() {
    let c = clip();
    let root = make_root(&c).unwrap();
    let request = ScoreRequest::from_stimulus(&stimulus(&root, &c)).unwrap();
    golden("wire/score_request.json", &request);
    let response = ScoreResponse {
        config_id: root.key().id(),
        score: 0.8125,
        label: "rowing".into(),
        top_labels: Some(vec!["rowing".into(), "canoeing".into()]),
    };
    golden("wire/score_response.json", &response);
    assert_eq!(request.decode_frames().unwrap(), render(&root, &c).unwrap());
}

#[test]
fn wire_batch_documents() {
    let c = clip();
    let (root, tl) = configs(&c);
    let batch: Vec<ScoreRequest> = [&root, &tl]
        .iter()
        .map(|cfg| ScoreRequest::from_stimulus(&stimulus(cfg, &c)).unwrap())
        .collect();
    golden("wire/score_batch_request.json", &batch);
    let responses = vec![
        ScoreResponse {
            config_id: root.key().id(),
            score: 0.8125,
            label: "rowing".into(),
            top_labels: None,
        },
        ScoreResponse {
            config_id: tl.key().id(),
            score: 0.25,
            label: "mopping".into(),
            top_labels: None,
        },
    ];
    golden("wire/score_batch_response.json", &responses);
}

#[test]
fn study_documents() {
    let c = clip();
    let (root, tl) = configs(&c);
    let service = StudyService::new(Arc::new(ManualClock::new(1_000)));
    service.add_clip(c.clone(), AnswerKey::new("rowing", ["boat", "oar"], ["row"]).unwrap());

    let enqueue = EnqueueRequest::Recognition {
        configs: vec![root.clone()],
        n_subjects: 1,
    };
    golden("study/enqueue_recognition.json", &enqueue);
    let probe = Probe {
        frame_position: 0,
        x: 2,
        y: 3,
        component_key: ["oar".to_string(), "paddle".to_string()].into_iter().collect(),
        component_name: "oar".into(),
    };
    golden(
        "study/enqueue_probe.json",
        &EnqueueRequest::Probe {
            config: tl.clone(),
            probes: vec![probe],
            n_subjects: 1,
        },
    );

    let job_ids = service.enqueue_recognition(&[root.clone()], 1).unwrap();
    golden("study/enqueue_response.json", &EnqueueResponse { job_ids: job_ids.clone() });

    let assigned = service.next_job("s-01").unwrap();
    let payload = JobPayload::from_assigned(&assigned).unwrap();
    golden("study/job_payload.json", &payload);

    let submission = ResponseSubmission {
        subject: "s-01".into(),
        text: "someone rowing a boat".into(),
    };
    golden("study/response_submission.json", &submission);
    let stored = service.submit_response(payload.job_id, &submission.subject, &submission.text).unwrap();
    golden("study/stored_response.json", &stored);
    assert!(matches!(stored, StoredResponse::Recognition(ref r) if r.correct));

    golden("study/status_complete.json", &service.status(&root.key()));
    assert!(matches!(service.status(&root.key()), StudyStatus::Complete { .. }));
    golden("study/status_unknown.json", &service.status(&tl.key()));
}
