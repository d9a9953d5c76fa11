//! Grayscale frames and the pixel operations used to render reduced
//! configurations from source clips.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Maximum number of ROI frames a clip may carry at ingestion.
pub const MAX_CLIP_FRAMES: usize = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameError {
    #[error("frame sample count {actual} does not match {width}x{height}")]
    SampleCount { width: u32, height: u32, actual: usize },
    #[error("frame dimensions must be at least 1x1")]
    EmptyFrame,
    #[error("clip has no frames")]
    NoFrames,
    #[error("clip has {0} frames; at most {MAX_CLIP_FRAMES} are allowed")]
    TooManyFrames(usize),
    #[error("clip frames have mismatched dimensions")]
    MismatchedFrames,
    #[error("clip frames must be square, got {width}x{height}")]
    NotSquare { width: u32, height: u32 },
    #[error("pixel block {x0},{y0}..{x1},{y1} is outside a {width}x{height} frame")]
    OutOfBounds {
        x0: i64,
        y0: i64,
        x1: i64,
        y1: i64,
        width: u32,
        height: u32,
    },
}

/// Row-major 8-bit grayscale frame.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrameGrid {
    width: u32,
    height: u32,
    samples: Vec<u8>,
}

impl FrameGrid {
    pub fn new(width: u32, height: u32, samples: Vec<u8>) -> Result<Self, FrameError> {
        if width == 0 || height == 0 {
            return Err(FrameError::EmptyFrame);
        }
        if samples.len() != width as usize * height as usize {
            return Err(FrameError::SampleCount {
                width,
                height,
                actual: samples.len(),
            });
        }
        Ok(FrameGrid {
            width,
            height,
            samples,
        })
    }

    pub fn filled(width: u32, height: u32, value: u8) -> Self {
        FrameGrid {
            width,
            height,
            samples: vec![value; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> u8) -> Self {
        let mut samples = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                samples.push(f(x, y));
            }
        }
        FrameGrid {
            width,
            height,
            samples,
        }
    }

    /// Converts interleaved 8-bit RGB to grayscale with Rec. 601 luma weights,
    /// rounded half-up.
    pub fn from_rgb(width: u32, height: u32, rgb: &[u8]) -> Result<Self, FrameError> {
        if rgb.len() != width as usize * height as usize * 3 {
            return Err(FrameError::SampleCount {
                width,
                height,
                actual: rgb.len() / 3,
            });
        }
        let samples = rgb.chunks_exact(3).map(|p| luma601(p[0], p[1], p[2])).collect();
        FrameGrid::new(width, height, samples)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.samples[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        self.samples[y as usize * self.width as usize + x as usize] = value;
    }

    /// Copies the integer pixel block `[x0, x1) x [y0, y1)`.
    pub fn extract(&self, x0: i64, y0: i64, x1: i64, y1: i64) -> Result<FrameGrid, FrameError> {
        if x0 < 0 || y0 < 0 || x1 > self.width as i64 || y1 > self.height as i64 || x1 <= x0 || y1 <= y0 {
            return Err(FrameError::OutOfBounds {
                x0,
                y0,
                x1,
                y1,
                width: self.width,
                height: self.height,
            });
        }
        let (w, h) = ((x1 - x0) as usize, (y1 - y0) as usize);
        let mut samples = Vec::with_capacity(w * h);
        for row in y0 as usize..y1 as usize {
            let start = row * self.width as usize + x0 as usize;
            samples.extend_from_slice(&self.samples[start..start + w]);
        }
        Ok(FrameGrid {
            width: w as u32,
            height: h as u32,
            samples,
        })
    }

    /// Area-average (box filter) resample to `out_w x out_h`.
    ///
    /// Every output pixel is the overlap-weighted mean of the input pixels it
    /// covers. Integer arithmetic with half-up rounding keeps results
    /// bit-reproducible, and constant regions stay constant.
    pub fn area_resample(&self, out_w: u32, out_h: u32) -> FrameGrid {
        if out_w == self.width && out_h == self.height {
            return self.clone();
        }
        let wx = axis_weights(self.width, out_w);
        let wy = axis_weights(self.height, out_h);
        let total = self.width as u64 * self.height as u64;
        let mut samples = Vec::with_capacity(out_w as usize * out_h as usize);
        for row in &wy {
            for col in &wx {
                let mut acc: u64 = 0;
                for &(py, wgt_y) in row {
                    let base = py as usize * self.width as usize;
                    for &(px, wgt_x) in col {
                        acc += wgt_y * wgt_x * self.samples[base + px as usize] as u64;
                    }
                }
                samples.push(((2 * acc + total) / (2 * total)) as u8);
            }
        }
        FrameGrid {
            width: out_w,
            height: out_h,
            samples,
        }
    }
}

/// Per output index, the `(input index, weight)` pairs it overlaps. Weights
/// are in units of `1/out` of an input pixel and sum to `input` per output.
fn axis_weights(input: u32, out: u32) -> Vec<Vec<(u32, u64)>> {
    let (input, out) = (input as u64, out as u64);
    (0..out)
        .map(|i| {
            let lo = i * input;
            let hi = (i + 1) * input;
            let first = lo / out;
            let last = (hi - 1) / out;
            (first..=last)
                .filter_map(|p| {
                    let overlap = hi.min((p + 1) * out).saturating_sub(lo.max(p * out));
                    (overlap > 0).then_some((p as u32, overlap))
                })
                .collect()
        })
        .collect()
}

pub fn luma601(r: u8, g: u8, b: u8) -> u8 {
    ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8
}

/// The manually selected square ROI frames of one source video.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceClip {
    clip_id: String,
    frames: Vec<FrameGrid>,
    action_category: String,
    answer_key_id: String,
}

impl SourceClip {
    pub fn new(
        clip_id: impl Into<String>,
        frames: Vec<FrameGrid>,
        action_category: impl Into<String>,
        answer_key_id: impl Into<String>,
    ) -> Result<Self, FrameError> {
        validate_frames(&frames)?;
        Ok(SourceClip {
            clip_id: clip_id.into(),
            frames,
            action_category: action_category.into(),
            answer_key_id: answer_key_id.into(),
        })
    }

    pub fn clip_id(&self) -> &str {
        &self.clip_id
    }

    pub fn frames(&self) -> &[FrameGrid] {
        &self.frames
    }

    pub fn action_category(&self) -> &str {
        &self.action_category
    }

    pub fn answer_key_id(&self) -> &str {
        &self.answer_key_id
    }

    /// Side length of the (square) ROI.
    pub fn side(&self) -> u32 {
        self.frames[0].width
    }
}

pub(crate) fn validate_frames(frames: &[FrameGrid]) -> Result<(), FrameError> {
    let first = frames.first().ok_or(FrameError::NoFrames)?;
    if frames.len() > MAX_CLIP_FRAMES {
        return Err(FrameError::TooManyFrames(frames.len()));
    }
    if first.width != first.height {
        return Err(FrameError::NotSquare {
            width: first.width,
            height: first.height,
        });
    }
    if frames
        .iter()
        .any(|f| f.width != first.width || f.height != first.height)
    {
        return Err(FrameError::MismatchedFrames);
    }
    Ok(())
}
