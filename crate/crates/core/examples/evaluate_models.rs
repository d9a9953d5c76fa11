//! Recognition gaps for humans and a model with their comparison, then
//! ranking metrics over a seeded train/test split.
//!
//! cargo run --example evaluate_models

use std::collections::BTreeMap;

use minvid::eval::gaps::{triplets_from_tree, with_model_scores};
use minvid::eval::{
    assemble_dataset, average_precision, gap_report, human_model_comparison, mine_hard_negatives, HardNegativeRule,
    Label, RateSource, ScoredExample, SplitSpec,
};
use minvid::oracle::synthetic::SyntheticOracle;
use minvid::search::NodeStatus;
use minvid::{make_root, run_search, ConfigKey, FrameGrid, OracleHandle, SearchParams, SourceClip};

fn main() {
    let frames = (0..2)
        .map(|t| FrameGrid::from_fn(20, 20, |x, y| ((x * 3 + y * 17 + t * 40) % 256) as u8))
        .collect();
    let clip = SourceClip::new("demo", frames, "rowing", "rowing").expect("valid clip");
    // Stand-in "human" rates: high while big and moving, low after.
    let humans = SyntheticOracle::new(|k| {
        if k.rendered_side() >= 12 && k.frame_indices.len() == 2 {
            0.8
        } else {
            0.1 + 0.02 * k.rendered_side() as f64
        }
    });
    let tree = run_search(make_root(&clip).unwrap(), &clip, &OracleHandle::new(humans), SearchParams::default())
        .expect("search");

    let triplets = triplets_from_tree(&tree).expect("triplets");
    let human = gap_report(&triplets, RateSource::Human).expect("gaps");
    print!("{}", human.summary_table());

    // A model that degrades gracefully: its score is smooth in the size.
    let model_scores: BTreeMap<ConfigKey, f64> = tree
        .nodes()
        .map(|n| (n.key.clone(), (n.config.rendered_side() as f64 / 20.0).min(1.0)))
        .collect();
    let model = gap_report(&with_model_scores(&triplets, &model_scores).unwrap(), RateSource::Model).unwrap();
    print!("{}", model.summary_table());
    let cmp = human_model_comparison(&human, &model).expect("comparison");
    println!(
        "human spatial gap exceeds the model's in {}/{} triplets",
        cmp.spatial_human_exceeds,
        cmp.triplets.len()
    );

    // Minimal configurations are positives; everything below them negatives.
    let examples: Vec<ScoredExample> = tree
        .nodes()
        .filter(|n| n.status != NodeStatus::Pending)
        .map(|n| {
            let label = if n.status == NodeStatus::Minimal { Label::Positive } else { Label::Negative };
            ScoredExample::new(n.key.clone(), label, model_scores[&n.key])
        })
        .collect();
    println!("average precision: {:.4}", average_precision(&examples).unwrap());
    let hard = mine_hard_negatives(&examples, HardNegativeRule::PositiveQuantile(0.5)).unwrap();
    println!("hard negatives at or above the median positive score: {}", hard.len());

    let (pos, neg): (Vec<_>, Vec<_>) = examples.iter().partition(|e| e.is_positive());
    let pos: Vec<ConfigKey> = pos.into_iter().map(|e| e.config_key.clone()).collect();
    let neg: Vec<ConfigKey> = neg.into_iter().map(|e| e.config_key.clone()).collect();
    let data = assemble_dataset(&pos, &neg, SplitSpec { train_fraction: 0.8, seed: 7 }).unwrap();
    println!(
        "train {}+{} (positive weight {:?}), test {}+{}",
        data.train.n_positive, data.train.n_negative, data.train.positive_weight, data.test.n_positive, data.test.n_negative
    );
}
