//! Looping GIF export of rendered configurations.

use std::borrow::Cow;
use std::path::Path;

use super::{write_atomic, IoError};
use crate::config::{render, VideoConfig};
use crate::frame::{FrameGrid, SourceClip};

/// Frame delay in hundredths of a second for a playback rate.
pub fn frame_delay_cs(fps: u32) -> u16 {
    let fps = fps.max(1);
    ((200 + fps) / (2 * fps)).min(u16::MAX as u32) as u16
}

/// Encodes frames as an infinitely looping GIF.
///
/// A 256-entry gray ramp is used as the global palette, so every 8-bit sample
/// maps to the palette index of the same value and decoding is lossless.
pub fn encode_loop(frames: &[FrameGrid], fps: u32) -> Result<Vec<u8>, IoError> {
    let first = frames.first().ok_or_else(|| IoError::Encode("no frames".into()))?;
    let (w, h) = (first.width(), first.height());
    if frames.iter().any(|f| f.width() != w || f.height() != h) {
        return Err(IoError::Encode("frames differ in size".into()));
    }
    let (w16, h16) = match (u16::try_from(w), u16::try_from(h)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return Err(IoError::Encode(format!("{w}x{h} is too large for a GIF"))),
    };
    let palette: Vec<u8> = (0..=255u8).flat_map(|v| [v, v, v]).collect();
    let mut out = Vec::new();
    {
        let enc_err = |e: ::gif::EncodingError| IoError::Encode(e.to_string());
        let mut encoder = ::gif::Encoder::new(&mut out, w16, h16, &palette).map_err(enc_err)?;
        encoder.set_repeat(::gif::Repeat::Infinite).map_err(enc_err)?;
        let delay = frame_delay_cs(fps);
        for frame in frames {
            let gif_frame = ::gif::Frame {
                width: w16,
                height: h16,
                delay,
                buffer: Cow::Borrowed(frame.samples()),
                ..::gif::Frame::default()
            };
            encoder.write_frame(&gif_frame).map_err(enc_err)?;
        }
    }
    Ok(out)
}

/// Renders `config` and writes it to `path` as a looping GIF.
pub fn export_loop(config: &VideoConfig, clip: &SourceClip, path: &Path) -> Result<(), IoError> {
    let frames = render(config, clip)?;
    let bytes = encode_loop(&frames, config.fps)?;
    write_atomic(path, &bytes)
}

/// Decoded contents of a GIF loop.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodedLoop {
    pub frames: Vec<FrameGrid>,
    pub delays_cs: Vec<u16>,
    pub loops_forever: bool,
}

pub fn decode_loop(bytes: &[u8]) -> Result<DecodedLoop, IoError> {
    let bad = |e: ::gif::DecodingError| IoError::BadImage(e.to_string());
    let mut options = ::gif::DecodeOptions::new();
    options.set_color_output(::gif::ColorOutput::RGBA);
    let mut decoder = options.read_info(bytes).map_err(bad)?;
    let (w, h) = (decoder.width() as u32, decoder.height() as u32);
    let mut frames = Vec::new();
    let mut delays_cs = Vec::new();
    while let Some(frame) = decoder.read_next_frame().map_err(bad)? {
        if (frame.width as u32, frame.height as u32) != (w, h) || frame.left != 0 || frame.top != 0 {
            return Err(IoError::BadImage("partial frames are not supported".into()));
        }
        delays_cs.push(frame.delay);
        let rgb: Vec<u8> = frame
            .buffer
            .chunks_exact(4)
            .flat_map(|p| [p[0], p[1], p[2]])
            .collect();
        frames.push(FrameGrid::from_rgb(w, h, &rgb)?);
    }
    Ok(DecodedLoop {
        frames,
        delays_cs,
        loops_forever: decoder.repeat() == ::gif::Repeat::Infinite,
    })
}
