//! Expands a 50-pixel, 2-frame clip one level and prints each reduction's
//! key and rendered size with its mean brightness.
//!
//! cargo run --example render_reductions

use minvid::reduction::expand;
use minvid::{make_root, render, FrameGrid, SourceClip};

fn main() {
    let frames = (0..2)
        .map(|t| FrameGrid::from_fn(50, 50, |x, y| ((x * 5 + y * 3 + t * 60) % 256) as u8))
        .collect();
    let clip = SourceClip::new("demo", frames, "rowing", "rowing").expect("valid clip");
    let root = make_root(&clip).expect("root");
    println!("root {} renders {}x{}", root.key(), root.rendered_side(), root.rendered_side());

    let expansion = expand(&root, 4);
    for (edge, child) in &expansion.children {
        let frames = render(child, &clip).expect("render");
        let mean: f64 = frames.iter().flat_map(|f| f.samples()).map(|&v| v as f64).sum::<f64>()
            / frames.iter().map(|f| f.samples().len()).sum::<usize>() as f64;
        println!(
            "{edge:?}: {} side={} frames={} mean={mean:.1}",
            child.key().id(),
            child.rendered_side(),
            frames.len()
        );
    }
    println!("blocked by the size floor: {:?}", expansion.blocked);
}
