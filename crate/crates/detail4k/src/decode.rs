//! PNG and JPEG file decoding into 8-bit rasters.

use std::io::Cursor;
use std::path::Path;

use detail4k_core::image::ImageU8;
use png::{BitDepth, ColorType, Transformations};
use zune_core::bytestream::ZCursor;
use zune_core::colorspace::ColorSpace;
use zune_core::options::DecoderOptions;
use zune_jpeg::JpegDecoder;

#[derive(Debug, thiserror::Error)]
pub enum DecodeError {
    #[error("unrecognized image format")]
    UnknownFormat,
    #[error("png: {0}")]
    Png(#[from] png::DecodingError),
    #[error("jpeg: {0}")]
    Jpeg(String),
    #[error("unsupported layout: {0}")]
    Layout(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

const PNG_MAGIC: &[u8] = b"\x89PNG\r\n\x1a\n";

pub fn decode_file(path: &Path) -> Result<ImageU8, DecodeError> {
    decode_bytes(&std::fs::read(path)?)
}

/// Dispatches on the magic bytes. Alpha is dropped, 16-bit samples keep
/// their high byte, grayscale stays single-channel.
pub fn decode_bytes(bytes: &[u8]) -> Result<ImageU8, DecodeError> {
    if bytes.starts_with(PNG_MAGIC) {
        decode_png(bytes)
    } else if bytes.starts_with(&[0xFF, 0xD8]) {
        decode_jpeg(bytes)
    } else {
        Err(DecodeError::UnknownFormat)
    }
}

fn decode_png(bytes: &[u8]) -> Result<ImageU8, DecodeError> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(Transformations::normalize_to_color8());
    let mut reader = decoder.read_info()?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| DecodeError::Layout("image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf)?;
    buf.truncate(info.buffer_size());
    let (w, h) = (info.width as usize, info.height as usize);
    let (channels, keep) = match info.color_type {
        ColorType::Grayscale => (1, 1),
        ColorType::GrayscaleAlpha => (2, 1),
        ColorType::Rgb => (3, 3),
        ColorType::Rgba => (4, 3),
        ColorType::Indexed => return Err(DecodeError::Layout("palette was not expanded".into())),
    };
    if info.bit_depth != BitDepth::Eight {
        return Err(DecodeError::Layout(format!(
            "{:?} samples after expansion",
            info.bit_depth
        )));
    }
    let data = if channels == keep {
        buf
    } else {
        buf.chunks_exact(channels)
            .flat_map(|px| px[..keep].iter().copied())
            .collect()
    };
    ImageU8::new(w, h, keep, data).map_err(|e| DecodeError::Layout(e.to_string()))
}

/// An end-of-image marker must follow the last start-of-scan marker.
/// Entropy-coded data stuffs every `0xFF`, so neither can appear inside it.
fn has_end_marker(bytes: &[u8]) -> bool {
    let last_scan = bytes.windows(2).rposition(|w| w == [0xFF, 0xDA]);
    match last_scan {
        Some(i) => bytes[i..].windows(2).any(|w| w == [0xFF, 0xD9]),
        None => false,
    }
}

fn decode_jpeg(bytes: &[u8]) -> Result<ImageU8, DecodeError> {
    if !has_end_marker(bytes) {
        return Err(DecodeError::Jpeg("truncated stream: no end-of-image marker".into()));
    }
    let mut decoder = JpegDecoder::new_with_options(ZCursor::new(bytes), DecoderOptions::default());
    decoder
        .decode_headers()
        .map_err(|e| DecodeError::Jpeg(format!("{e:?}")))?;
    let gray = decoder.input_colorspace() == Some(ColorSpace::Luma);
    let options =
        DecoderOptions::default().jpeg_set_out_colorspace(if gray { ColorSpace::Luma } else { ColorSpace::RGB });
    let mut decoder = JpegDecoder::new_with_options(ZCursor::new(bytes), options);
    let pixels = decoder.decode().map_err(|e| DecodeError::Jpeg(format!("{e:?}")))?;
    let info = decoder
        .info()
        .ok_or_else(|| DecodeError::Jpeg("missing frame header".into()))?;
    let channels = if gray { 1 } else { 3 };
    ImageU8::new(info.width as usize, info.height as usize, channels, pixels)
        .map_err(|e| DecodeError::Layout(e.to_string()))
}

/// 8-bit PNG of a 1- or 3-channel raster.
pub fn encode_png(img: &ImageU8) -> Result<Vec<u8>, png::EncodingError> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, img.width() as u32, img.height() as u32);
        enc.set_color(if img.channels() == 1 {
            ColorType::Grayscale
        } else {
            ColorType::Rgb
        });
        enc.set_depth(BitDepth::Eight);
        let mut writer = enc.write_header()?;
        writer.write_image_data(img.data())?;
    }
    Ok(out)
}

pub fn is_image_path(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"))
        .unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use detail4k_core::jpeg::{encode_baseline, EncoderConfig};

    #[test]
    fn png_round_trip() {
        for c in [1, 3] {
            let img = ImageU8::from_fn(13, 7, c, |x, y, ch| (x * 19 + y * 7 + ch * 50) as u8).unwrap();
            assert_eq!(decode_bytes(&encode_png(&img).unwrap()).unwrap(), img);
        }
    }

    #[test]
    fn own_jpeg_decodes_with_reference_decoder() {
        let img = ImageU8::from_fn(33, 17, 3, |x, y, ch| (x * 5 + y * 9 + ch * 30) as u8).unwrap();
        let bytes = encode_baseline(&img, &EncoderConfig::default()).unwrap();
        let out = decode_bytes(&bytes).unwrap();
        assert_eq!((out.width(), out.height(), out.channels()), (33, 17, 3));
        let gray = ImageU8::filled(20, 20, &[90]).unwrap();
        let out = decode_bytes(&encode_baseline(&gray, &EncoderConfig::default()).unwrap()).unwrap();
        assert_eq!(out, gray);
    }

    #[test]
    fn garbage_rejected() {
        assert!(matches!(decode_bytes(b"hello"), Err(DecodeError::UnknownFormat)));
        assert!(decode_bytes(PNG_MAGIC).is_err());
        let img = ImageU8::from_fn(32, 32, 3, |x, y, ch| (x * 5 + y * 9 + ch * 30) as u8).unwrap();
        let bytes = encode_baseline(&img, &EncoderConfig::default()).unwrap();
        assert!(decode_bytes(&bytes[..bytes.len() - 40]).is_err());
        assert!(decode_bytes(&bytes[..bytes.len() - 2]).is_err());
    }

    #[test]
    fn extensions() {
        assert!(is_image_path(Path::new("a/b.JPG")));
        assert!(is_image_path(Path::new("x.jpeg")));
        assert!(!is_image_path(Path::new("x.gif")));
        assert!(!is_image_path(Path::new("png")));
    }
}
