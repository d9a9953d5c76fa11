//! One-step spatial and temporal reductions of a configuration.
//!
//! A configuration has at most `5 + frames` children. Five are spatial (four
//! corner crops plus one resolution step) and the rest each drop one
//! retained frame. Children are always produced in the order TL, TR, BL, BR,
//! resolution, drop(first) .. drop(last).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::VideoConfig;
use crate::geometry::{scaled_side, Corner};

/// Smallest rendered side (pixels) a reduced child may have by default.
pub const DEFAULT_MIN_SIDE: u32 = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("reduced side {side} would fall below the {min_side}px floor")]
    FloorReached { side: i64, min_side: u32 },
    #[error("cannot drop the last remaining frame")]
    LastFrame,
    #[error("frame position {position} out of range for {len} retained frames")]
    BadPosition { position: usize, len: usize },
}

/// How a child was derived from its parent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReductionEdge {
    Crop { corner: Corner },
    Resolution,
    /// `dropped_frame_index` is the source frame index that was removed.
    DropFrame { dropped_frame_index: usize },
}

impl ReductionEdge {
    pub fn is_spatial(&self) -> bool {
        !self.is_temporal()
    }

    pub fn is_temporal(&self) -> bool {
        matches!(self, ReductionEdge::DropFrame { .. })
    }

    /// Applies this edge to `parent`; the same function `expand` uses.
    pub fn apply(&self, parent: &VideoConfig, min_side: u32) -> Result<VideoConfig, ReductionError> {
        match *self {
            ReductionEdge::Crop { corner } => crop_corner(parent, corner, min_side),
            ReductionEdge::Resolution => reduce_resolution(parent, min_side),
            ReductionEdge::DropFrame { dropped_frame_index } => {
                let position = parent
                    .frame_indices
                    .iter()
                    .position(|&i| i == dropped_frame_index)
                    .ok_or(ReductionError::BadPosition {
                        position: dropped_frame_index,
                        len: parent.frame_indices.len(),
                    })?;
                drop_frame(parent, position)
            }
        }
    }
}

fn check_floor(side: i64, min_side: u32) -> Result<(), ReductionError> {
    if side < min_side as i64 || side < 1 {
        Err(ReductionError::FloorReached { side, min_side })
    } else {
        Ok(())
    }
}

pub fn crop_corner(config: &VideoConfig, corner: Corner, min_side: u32) -> Result<VideoConfig, ReductionError> {
    let crop = config.crop.shrink_to(corner);
    check_floor(scaled_side(crop.side, config.scale_exp), min_side)?;
    Ok(VideoConfig {
        crop,
        ..config.clone()
    })
}

pub fn reduce_resolution(config: &VideoConfig, min_side: u32) -> Result<VideoConfig, ReductionError> {
    let scale_exp = config.scale_exp + 1;
    check_floor(scaled_side(config.crop.side, scale_exp), min_side)?;
    Ok(VideoConfig {
        scale_exp,
        ..config.clone()
    })
}

/// Removes the retained frame at `position` (an index into `frame_indices`).
pub fn drop_frame(config: &VideoConfig, position: usize) -> Result<VideoConfig, ReductionError> {
    let len = config.frame_indices.len();
    if len < 2 {
        return Err(ReductionError::LastFrame);
    }
    if position >= len {
        return Err(ReductionError::BadPosition { position, len });
    }
    let mut frame_indices = config.frame_indices.clone();
    frame_indices.remove(position);
    Ok(VideoConfig {
        frame_indices,
        ..config.clone()
    })
}

/// Children of one configuration plus the edges the size floor blocked.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expansion {
    pub children: Vec<(ReductionEdge, VideoConfig)>,
    pub blocked: Vec<ReductionEdge>,
}

pub fn expand(config: &VideoConfig, min_side: u32) -> Expansion {
    let mut edges: Vec<ReductionEdge> = Corner::ALL
        .iter()
        .map(|&corner| ReductionEdge::Crop { corner })
        .collect();
    edges.push(ReductionEdge::Resolution);
    if config.frame_indices.len() >= 2 {
        edges.extend(
            config
                .frame_indices
                .iter()
                .map(|&i| ReductionEdge::DropFrame { dropped_frame_index: i }),
        );
    }

    let mut expansion = Expansion {
        children: Vec::with_capacity(edges.len()),
        blocked: Vec::new(),
    };
    for edge in edges {
        match edge.apply(config, min_side) {
            Ok(child) => expansion.children.push((edge, child)),
            Err(_) => expansion.blocked.push(edge),
        }
    }
    expansion
}
