//! 8-bit grayscale PNG encode/decode.

use image::{DynamicImage, ImageFormat};

use super::IoError;
use crate::frame::FrameGrid;

/// Encodes a frame as an 8-bit grayscale PNG with fixed encoder settings, so
/// equal frames always produce equal bytes.
pub fn encode_png(frame: &FrameGrid) -> Result<Vec<u8>, IoError> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, frame.width(), frame.height());
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Eight);
        encoder.set_compression(png::Compression::Balanced);
        let mut writer = encoder
            .write_header()
            .map_err(|e| IoError::Encode(e.to_string()))?;
        writer
            .write_image_data(frame.samples())
            .map_err(|e| IoError::Encode(e.to_string()))?;
    }
    Ok(out)
}

/// Decodes any PNG to grayscale. Grayscale input is taken as-is; color input
/// is converted with Rec. 601 luma weights.
pub fn decode_png(bytes: &[u8]) -> Result<FrameGrid, IoError> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| IoError::BadImage(e.to_string()))?;
    to_frame(img)
}

pub(crate) fn to_frame(img: DynamicImage) -> Result<FrameGrid, IoError> {
    let (w, h) = (img.width(), img.height());
    let frame = match img {
        DynamicImage::ImageLuma8(gray) => FrameGrid::new(w, h, gray.into_raw()),
        other => FrameGrid::from_rgb(w, h, other.to_rgb8().as_raw()),
    };
    frame.map_err(|e| IoError::BadImage(e.to_string()))
}
