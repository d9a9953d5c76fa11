//! Runs the reduction search against a synthetic oracle and interrupts it
//! halfway. The search then resumes from the serialized tree and prints the
//! minimal set with its sub-minimal reductions.
//!
//! cargo run --example synthetic_search

use std::ops::ControlFlow;

use minvid::oracle::synthetic::SyntheticOracle;
use minvid::search::{run_search_with, SearchError};
use minvid::{make_root, minimal_set, resume, sub_minimal_set, FrameGrid, OracleHandle, SearchParams, SearchTree, SourceClip};

fn main() {
    let frames = (0..2)
        .map(|t| FrameGrid::from_fn(24, 24, |x, y| ((x * 9 + y * 4 + t * 50) % 256) as u8))
        .collect();
    let clip = SourceClip::new("demo", frames, "rowing", "rowing").expect("valid clip");
    // Recognized while at least 14 pixels wide and both frames are kept.
    let oracle = OracleHandle::new(SyntheticOracle::threshold(14, 2, 0.9, 0.2));

    let mut steps = 0;
    let mut stop_early = |_: &SearchTree| {
        steps += 1;
        if steps == 10 {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    };
    let root = make_root(&clip).expect("root");
    let partial = match run_search_with(root, &clip, &oracle, SearchParams::default(), &mut stop_early) {
        Err(SearchError::Interrupted { tree }) => *tree,
        other => panic!("expected an interruption, got {other:?}"),
    };
    println!("interrupted with {} nodes", partial.node_count());

    let json = serde_json::to_string(&partial).expect("serialize");
    let restored: SearchTree = serde_json::from_str(&json).expect("deserialize");
    let tree = resume(restored, &clip, &oracle).expect("resume");
    println!(
        "finished: {} nodes, {} oracle queries",
        tree.node_count(),
        tree.queried_count()
    );

    for config in minimal_set(&tree) {
        let key = config.key();
        let set = sub_minimal_set(&tree, &key).expect("minimal");
        println!(
            "minimal {} side={} frames={}: {} spatial, {} temporal reductions",
            key.id(),
            config.rendered_side(),
            config.frame_count(),
            set.spatial.len(),
            set.temporal.len()
        );
    }
}
