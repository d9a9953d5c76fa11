//! Video configurations with their canonical identity and rendering.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::frame::{FrameError, FrameGrid, SourceClip};
use crate::geometry::{scaled_side, CropRect};

/// Default presentation rate (frames per second).
pub const DEFAULT_FPS: u32 = 2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("clip has no frames")]
    EmptyClip,
    #[error("config belongs to clip {config} but was rendered against clip {clip}")]
    ClipMismatch { config: String, clip: String },
    #[error("frame index {0} is not present in the clip")]
    FrameOutOfRange(usize),
    #[error("frame indices must be non-empty and strictly increasing")]
    BadFrameIndices,
    #[error("crop rectangle lies outside the source ROI")]
    CropOutOfBounds,
    #[error("rendered side rounds to {0}, below one pixel")]
    RenderTooSmall(i64),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// A reduced stimulus: the kept source frames and the shown square of the
/// ROI, with its resolution step.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VideoConfig {
    pub clip_id: String,
    pub frame_indices: Vec<usize>,
    pub crop: CropRect,
    /// Resolution exponent `k`; the effective scale is `(4/5)^k`.
    pub scale_exp: u32,
    pub fps: u32,
}

impl VideoConfig {
    /// Side length of the frames this config renders to.
    pub fn rendered_side(&self) -> i64 {
        scaled_side(self.crop.side, self.scale_exp)
    }

    pub fn frame_count(&self) -> usize {
        self.frame_indices.len()
    }

    pub fn key(&self) -> ConfigKey {
        canonical_key(self)
    }

    /// Checks the structural invariants against the owning clip.
    pub fn validate(&self, clip: &SourceClip) -> Result<(), ConfigError> {
        if self.clip_id != clip.clip_id() {
            return Err(ConfigError::ClipMismatch {
                config: self.clip_id.clone(),
                clip: clip.clip_id().to_string(),
            });
        }
        if self.frame_indices.is_empty() || self.frame_indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConfigError::BadFrameIndices);
        }
        if let Some(&bad) = self.frame_indices.iter().find(|&&i| i >= clip.frames().len()) {
            return Err(ConfigError::FrameOutOfRange(bad));
        }
        if !self.crop.within(clip.side()) {
            return Err(ConfigError::CropOutOfBounds);
        }
        Ok(())
    }
}

/// Path-independent identity of a configuration.
///
/// Ordering is lexicographic over the fields and is used wherever the search
/// needs a deterministic order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConfigKey {
    pub clip_id: String,
    pub frame_indices: Vec<usize>,
    pub crop: CropRect,
    pub scale_exp: u32,
}

impl ConfigKey {
    /// Short content identifier (16 hex digits of SHA-256 over the canonical
    /// text form), used wherever a configuration is named outside memory.
    pub fn id(&self) -> String {
        let digest = Sha256::digest(self.to_string().as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn rendered_side(&self) -> i64 {
        scaled_side(self.crop.side, self.scale_exp)
    }
}

impl fmt::Display for ConfigKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let frames: Vec<String> = self.frame_indices.iter().map(|i| i.to_string()).collect();
        write!(
            f,
            "{}|f={}|x={}/{}|y={}/{}|s={}/{}|k={}",
            self.clip_id,
            frames.join(","),
            self.crop.x.numer(),
            self.crop.x.denom(),
            self.crop.y.numer(),
            self.crop.y.denom(),
            self.crop.side.numer(),
            self.crop.side.denom(),
            self.scale_exp
        )
    }
}

/// Starting configuration: every frame, the whole ROI, full resolution, 2 Hz.
pub fn make_root(clip: &SourceClip) -> Result<VideoConfig, ConfigError> {
    if clip.frames().is_empty() {
        return Err(ConfigError::EmptyClip);
    }
    Ok(VideoConfig {
        clip_id: clip.clip_id().to_string(),
        frame_indices: (0..clip.frames().len()).collect(),
        crop: CropRect::full(clip.side()),
        scale_exp: 0,
        fps: DEFAULT_FPS,
    })
}

pub fn canonical_key(config: &VideoConfig) -> ConfigKey {
    ConfigKey {
        clip_id: config.clip_id.clone(),
        frame_indices: config.frame_indices.clone(),
        crop: config.crop.clone(),
        scale_exp: config.scale_exp,
    }
}

/// Renders the retained frames: crop (bounds rounded half-up) then
/// area-average to the rendered side.
pub fn render(config: &VideoConfig, clip: &SourceClip) -> Result<Vec<FrameGrid>, ConfigError> {
    config.validate(clip)?;
    let out = config.rendered_side();
    if out < 1 {
        return Err(ConfigError::RenderTooSmall(out));
    }
    let (x0, y0, x1, y1) = config.crop.pixel_bounds();
    config
        .frame_indices
        .iter()
        .map(|&i| {
            let block = clip.frames()[i].extract(x0, y0, x1, y1)?;
            Ok(block.area_resample(out as u32, out as u32))
        })
        .collect()
}
