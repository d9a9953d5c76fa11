//! Writes a reduced configuration as a 2 Hz looping GIF and checks that it
//! decodes back to the rendered frames.
//!
//! cargo run --example export_loop -- /tmp/loop.gif

use std::path::PathBuf;

use minvid::io::gif::{decode_loop, export_loop};
use minvid::reduction::{crop_corner, reduce_resolution};
use minvid::{make_root, render, Corner, FrameGrid, SourceClip};

fn main() {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("minvid_loop.gif"));
    let frames = (0..2)
        .map(|t| FrameGrid::from_fn(50, 50, |x, y| if (x / 5 + y / 5 + t) % 2 == 0 { 230 } else { 25 }))
        .collect();
    let clip = SourceClip::new("checker", frames, "rowing", "rowing").expect("valid clip");
    let root = make_root(&clip).unwrap();
    let config = reduce_resolution(&crop_corner(&root, Corner::TopRight, 4).unwrap(), 4).unwrap();

    export_loop(&config, &clip, &out).expect("export");
    let decoded = decode_loop(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(decoded.frames, render(&config, &clip).unwrap());
    println!(
        "{}: {} frames of {}x{}, delays {:?} cs, loops forever: {}",
        out.display(),
        decoded.frames.len(),
        decoded.frames[0].width(),
        decoded.frames[0].height(),
        decoded.delays_cs,
        decoded.loops_forever
    );
}
