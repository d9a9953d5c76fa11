//! Queries a model over the HTTP scoring protocol. A stand-in model server
//! that scores by mean brightness runs in the background; point
//! `WireConfig::url` at a real one instead.
//!
//! cargo run --example wire_oracle

use std::time::Duration;

use axum::routing::post;
use axum::{Json, Router};
use minvid::oracle::wire::{ScoreRequest, ScoreResponse, WireConfig, WireOracle};
use minvid::{make_root, minimal_set, run_search, FrameGrid, OracleHandle, SearchParams, SourceClip};

fn score(req: &ScoreRequest) -> ScoreResponse {
    let frames = req.decode_frames().expect("valid frames");
    let side = frames[0].width() as f64;
    // A toy model: confident on large two-frame stimuli.
    let score = if frames.len() == 2 { (side / 20.0).min(1.0) } else { 0.2 };
    ScoreResponse {
        config_id: req.config_id.clone(),
        score,
        label: "rowing".into(),
        top_labels: None,
    }
}

fn main() {
    let app = Router::new()
        .route("/score", post(|Json(r): Json<ScoreRequest>| async move { Json(score(&r)) }))
        .route(
            "/score_batch",
            post(|Json(rs): Json<Vec<ScoreRequest>>| async move { Json(rs.iter().map(score).collect::<Vec<_>>()) }),
        );
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    listener.set_nonblocking(true).unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener).unwrap();
            axum::serve(listener, app).await.unwrap();
        });
    });
    std::thread::sleep(Duration::from_millis(50));

    let frames = (0..2)
        .map(|t| FrameGrid::from_fn(20, 20, |x, y| ((x * 13 + y * 5 + t * 70) % 256) as u8))
        .collect();
    let clip = SourceClip::new("demo", frames, "rowing", "rowing").expect("valid clip");
    let oracle = OracleHandle::new(WireOracle::new(WireConfig::new(url.clone())));
    let tree = run_search(make_root(&clip).unwrap(), &clip, &oracle, SearchParams::default()).expect("search");
    println!("model at {url}: {} configurations scored", oracle.upstream_calls());
    for config in minimal_set(&tree) {
        let rec = tree.node(&config.key()).and_then(|n| n.record.clone()).unwrap();
        println!(
            "minimal {} side={} rate={}/{}",
            config.key().id(),
            config.rendered_side(),
            rec.n_correct(),
            rec.n_subjects()
        );
    }
}
