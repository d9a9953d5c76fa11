//! Probe trials: subjects see a marked point in a minimal video and name
//! the component under it. A component counts as recognized when more
//! than half name it.
//!
//! cargo run --example probe_interpretation

use std::sync::Arc;

use minvid::oracle::AnswerKey;
use minvid::study::{component_summary, ManualClock, Probe, StudyService};
use minvid::{make_root, FrameGrid, SourceClip};

fn main() {
    let frames = (0..2)
        .map(|t| FrameGrid::from_fn(12, 12, |x, y| ((x * 20 + y * 9 + t * 33) % 256) as u8))
        .collect();
    let clip = SourceClip::new("row-01", frames, "rowing", "rowing").expect("valid clip");
    let service = StudyService::new(Arc::new(ManualClock::new(0)));
    service.add_clip(clip.clone(), AnswerKey::new("rowing", ["boat"], ["row"]).unwrap());
    let config = make_root(&clip).unwrap();

    let probe = |x, y, names: &[&str]| Probe {
        frame_position: 0,
        x,
        y,
        component_key: names.iter().map(|s| s.to_string()).collect(),
        component_name: names[0].to_string(),
    };
    let probes = [probe(2, 3, &["oar", "paddle"]), probe(8, 6, &["arm", "hand"]), probe(5, 10, &["water"])];
    service.enqueue_probes(&config, &probes, 10).expect("enqueue");

    // Scripted answers: the oar is named by 9 of 10, the arm by 6, the
    // water by only 5, which is not more than half.
    let correct = [("oar", 9), ("arm", 6), ("water", 5)];
    let mut subject = 0;
    while let Some(job) = service.next_job(&format!("s{subject}")) {
        let marker = job.job.probe.as_ref().expect("probe job");
        let (name, n_right) = correct.iter().find(|(n, _)| *n == marker.component_name).unwrap();
        let done = service.counts().completed;
        let answer = if done % 10 < *n_right as usize { name.to_string() } else { "a rope".to_string() };
        service.submit_response(job.job.job_id, &format!("s{subject}"), &answer).expect("submit");
        subject += 1;
    }

    let report = service.component_recognition(&config.key()).expect("report");
    for c in &report.components {
        println!(
            "{:<6} {}/{} recognized={}",
            c.component_name, c.n_correct, c.n_subjects, c.recognized
        );
    }
    println!("summary: {}", component_summary(&report.components).unwrap().display());
}
