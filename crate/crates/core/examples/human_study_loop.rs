//! Serves the human study over HTTP and drives a search with a human
//! oracle. Simulated subjects pull jobs and answer until every
//! configuration has its record.
//!
//! cargo run --example human_study_loop

use std::sync::Arc;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use minvid::io::png::decode_png;
use minvid::oracle::human::HumanOracle;
use minvid::oracle::AnswerKey;
use minvid::study::client::RemoteStudy;
use minvid::study::http::spawn;
use minvid::study::{StudyService, SystemClock};
use minvid::{make_root, minimal_set, resume, run_search, FrameGrid, OracleHandle, SearchParams, SourceClip};

const TOKEN: &str = "demo-token";

fn main() {
    let frames = (0..2)
        .map(|t| FrameGrid::from_fn(16, 16, |x, y| ((x * 11 + y * 7 + t * 90) % 256) as u8))
        .collect();
    let clip = SourceClip::new("row-01", frames, "rowing", "rowing").expect("valid clip");
    let service = Arc::new(StudyService::new(Arc::new(SystemClock)));
    service.add_clip(
        clip.clone(),
        AnswerKey::new("rowing", ["boat", "oar"], ["row", "paddle"]).expect("answer key"),
    );
    let server = spawn(service, TOKEN, "127.0.0.1:0".parse().unwrap()).expect("bind");
    println!("study service at {}", server.url());

    let oracle = OracleHandle::new(HumanOracle::new(RemoteStudy::new(server.url(), TOKEN)));
    let params = SearchParams {
        n_subjects: 5,
        ..SearchParams::default()
    };
    let mut tree = run_search(make_root(&clip).unwrap(), &clip, &oracle, params).expect("search");
    let subjects = RemoteStudy::new(server.url(), TOKEN);
    let mut next = 0;
    let mut round = 0;
    while !tree.is_complete() {
        round += 1;
        let mut answered = 0;
        // Each new subject sees at most one rowing stimulus.
        while let Some(job) = subjects.next_job(&format!("subject-{next}")).expect("next job") {
            let frame = decode_png(&STANDARD.decode(&job.frames[0]).unwrap()).unwrap();
            let text = if frame.width() >= 12 && job.frames.len() == 2 {
                "someone rowing a boat"
            } else {
                "not sure"
            };
            subjects.submit(job.job_id, &format!("subject-{next}"), text).expect("submit");
            next += 1;
            answered += 1;
        }
        println!("round {round}: {answered} trials answered");
        tree = resume(tree, &clip, &oracle).expect("resume");
    }
    println!("{} subjects took part", next);
    for config in minimal_set(&tree) {
        println!("minimal {} side={}", config.key().id(), config.rendered_side());
    }
}
