//! Importing a clip from a directory of numbered PNG frames.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::png::decode_png;
use super::{read_bytes, IoError};
use crate::frame::{FrameGrid, SourceClip, MAX_CLIP_FRAMES};

/// Square region of interest in source pixel coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roi {
    pub x: u32,
    pub y: u32,
    pub side: u32,
}

impl std::str::FromStr for Roi {
    type Err = IoError;

    /// Parses `x,y,side`.
    fn from_str(s: &str) -> Result<Self, IoError> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let nums: Result<Vec<u32>, _> = parts.iter().map(|p| p.parse::<u32>()).collect();
        match nums.as_deref() {
            Ok([x, y, side]) if *side > 0 => Ok(Roi { x: *x, y: *y, side: *side }),
            _ => Err(IoError::Parse(format!("expected x,y,side with side > 0, got {s:?}"))),
        }
    }
}

/// Content identifier of a clip: 16 hex digits of SHA-256 over its pixels.
pub fn clip_content_id(frames: &[FrameGrid]) -> String {
    let mut hasher = Sha256::new();
    for frame in frames {
        hasher.update(frame.width().to_le_bytes());
        hasher.update(frame.height().to_le_bytes());
        hasher.update(frame.samples());
    }
    hex::encode(&hasher.finalize()[..8])
}

/// Maps frame numbers to files: `frame_0007.png` is frame 7.
pub fn numbered_frames(dir: &Path) -> Result<BTreeMap<u32, PathBuf>, IoError> {
    let entries = std::fs::read_dir(dir).map_err(|e| IoError::Read {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut out = BTreeMap::new();
    for entry in entries.flatten() {
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() != Some("png") {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        let digits: String = stem
            .chars()
            .rev()
            .take_while(char::is_ascii_digit)
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect();
        if let Ok(n) = digits.parse::<u32>() {
            out.insert(n, path);
        }
    }
    Ok(out)
}

/// Crops the ROI out of the picked frames (by file number, in the given
/// order) and builds a clip whose id is its content hash.
pub fn import_clip(
    dir: &Path,
    roi: Roi,
    picks: &[u32],
    action_category: &str,
    answer_key_id: &str,
) -> Result<SourceClip, IoError> {
    if picks.is_empty() || picks.len() > MAX_CLIP_FRAMES {
        return Err(IoError::Parse(format!(
            "pick between 1 and {MAX_CLIP_FRAMES} frames, got {}",
            picks.len()
        )));
    }
    let files = numbered_frames(dir)?;
    let mut frames = Vec::with_capacity(picks.len());
    for &n in picks {
        let path = files.get(&n).ok_or(IoError::MissingFrame(n))?;
        let full = decode_png(&read_bytes(path)?)?;
        frames.push(crop_roi(&full, roi)?);
    }
    let id = clip_content_id(&frames);
    Ok(SourceClip::new(id, frames, action_category, answer_key_id)?)
}

pub fn crop_roi(frame: &FrameGrid, roi: Roi) -> Result<FrameGrid, IoError> {
    let fits = |start: u32, limit: u32| start.checked_add(roi.side).is_some_and(|end| end <= limit);
    if roi.side == 0 || !fits(roi.x, frame.width()) || !fits(roi.y, frame.height()) {
        return Err(IoError::RoiOutOfBounds {
            x: roi.x,
            y: roi.y,
            side: roi.side,
            width: frame.width(),
            height: frame.height(),
        });
    }
    let (x0, y0) = (roi.x as i64, roi.y as i64);
    Ok(frame.extract(x0, y0, x0 + roi.side as i64, y0 + roi.side as i64)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::png::encode_png;

    fn write_frames(dir: &Path, n: u32) {
        for i in 0..n {
            let frame = FrameGrid::from_fn(20, 12, |x, y| (x + 10 * y + 50 * i) as u8);
            std::fs::write(dir.join(format!("frame_{i:04}.png")), encode_png(&frame).unwrap()).unwrap();
        }
        std::fs::write(dir.join("notes.txt"), "ignored").unwrap();
    }

    #[test]
    fn imports_roi_of_picked_frames() {
        let dir = tempfile::tempdir().unwrap();
        write_frames(dir.path(), 6);
        let roi: Roi = "3,2,8".parse().unwrap();
        let clip = import_clip(dir.path(), roi, &[4, 1], "rowing", "rowing").unwrap();
        assert_eq!(clip.side(), 8);
        assert_eq!(clip.frames().len(), 2);
        assert_eq!(clip.frames()[0].get(0, 0), (3 + 20 + 200) as u8);
        assert_eq!(clip.frames()[1].get(7, 7), (10 + 90 + 50) as u8);
        assert_eq!(clip.clip_id().len(), 16);
        let again = import_clip(dir.path(), roi, &[4, 1], "rowing", "rowing").unwrap();
        assert_eq!(again.clip_id(), clip.clip_id());
        let other = import_clip(dir.path(), roi, &[1, 4], "rowing", "rowing").unwrap();
        assert_ne!(other.clip_id(), clip.clip_id());
    }

    #[test]
    fn import_errors() {
        let dir = tempfile::tempdir().unwrap();
        write_frames(dir.path(), 3);
        let roi = Roi { x: 0, y: 0, side: 8 };
        assert!(matches!(
            import_clip(dir.path(), roi, &[9], "c", "c"),
            Err(IoError::MissingFrame(9))
        ));
        assert!(matches!(
            import_clip(dir.path(), Roi { x: 10, y: 0, side: 12 }, &[0], "c", "c"),
            Err(IoError::RoiOutOfBounds { .. })
        ));
        assert!(import_clip(dir.path(), roi, &[], "c", "c").is_err());
        assert!(import_clip(dir.path(), roi, &[0, 1, 2, 0, 1, 2], "c", "c").is_err());
        assert!("1,2".parse::<Roi>().is_err());
        assert!("1,2,0".parse::<Roi>().is_err());
    }
}
