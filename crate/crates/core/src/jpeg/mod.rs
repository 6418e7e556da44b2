//! Deterministic baseline JPEG (JFIF) codec.
//!
//! The encoder always emits the Annex K quantization tables scaled with the
//! IJG quality convention and the four standard Huffman tables, so identical
//! input and configuration produce byte-identical streams. The decoder handles
//! baseline Huffman streams (enough to round-trip anything the encoder makes)
//! and rejects progressive, lossless and arithmetic-coded frames explicitly.

mod dct;
mod decoder;
mod encoder;
pub mod tables;

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

pub use decoder::decode_baseline;
pub use encoder::encode_baseline;

/// 64 quantizer steps in zig-zag order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantTable([u8; 64]);

impl QuantTable {
    /// Builds from zig-zag ordered entries; each must be in `1..=255`.
    pub fn from_zigzag(entries: [u8; 64]) -> Result<Self> {
        if entries.contains(&0) {
            return Err(Error::contract("quantization entries must be >= 1"));
        }
        Ok(QuantTable(entries))
    }

    fn from_natural(natural: &[u8; 64]) -> Self {
        let mut zz = [0u8; 64];
        for (i, &pos) in tables::ZIGZAG.iter().enumerate() {
            zz[i] = natural[pos];
        }
        QuantTable(zz)
    }

    /// Annex K luminance base table.
    pub fn luminance() -> Self {
        Self::from_natural(&tables::LUMA_QUANT_NATURAL)
    }

    /// Annex K chrominance base table.
    pub fn chrominance() -> Self {
        Self::from_natural(&tables::CHROMA_QUANT_NATURAL)
    }

    pub fn zigzag(&self) -> &[u8; 64] {
        &self.0
    }

    /// Entries rearranged into natural (row-major) order.
    pub fn natural(&self) -> [u8; 64] {
        let mut nat = [0u8; 64];
        for (i, &pos) in tables::ZIGZAG.iter().enumerate() {
            nat[pos] = self.0[i];
        }
        nat
    }
}

/// IJG quality scaling: `scale = q < 50 ? 5000/q : 200 - 2q`, entries clamped to `1..=255`.
pub fn scale_quant_table(base: &QuantTable, quality: u8) -> Result<QuantTable> {
    if !(1..=100).contains(&quality) {
        return Err(Error::contract(format!("quality {quality} outside 1..=100")));
    }
    let q = quality as u32;
    let scale = if q < 50 { 5000 / q } else { 200 - 2 * q };
    let mut out = [0u8; 64];
    for (o, &e) in out.iter_mut().zip(base.0.iter()) {
        *o = ((e as u32 * scale + 50) / 100).clamp(1, 255) as u8;
    }
    Ok(QuantTable(out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Subsampling {
    /// Chroma halved in both directions (2x2 box average).
    #[default]
    S420,
    /// Full-resolution chroma.
    S444,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EncoderConfig {
    pub quality: u8,
    pub subsampling: Subsampling,
    /// MCUs between restart markers; 0 disables restarts.
    pub restart_interval: u16,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            quality: 95,
            subsampling: Subsampling::S420,
            restart_interval: 0,
        }
    }
}

impl EncoderConfig {
    pub fn with_quality(quality: u8) -> Self {
        EncoderConfig {
            quality,
            ..Self::default()
        }
    }
}

/// One marker segment found by [`validate_structure`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub marker: u8,
    /// Offset of the `0xFF` byte introducing the marker.
    pub offset: usize,
    /// Length field value (0 for stand-alone markers such as SOI/EOI/RSTn).
    pub length: u16,
}

pub(crate) mod marker {
    pub const SOI: u8 = 0xD8;
    pub const EOI: u8 = 0xD9;
    pub const SOS: u8 = 0xDA;
    pub const DQT: u8 = 0xDB;
    pub const DHT: u8 = 0xC4;
    pub const DRI: u8 = 0xDD;
    pub const SOF0: u8 = 0xC0;
    pub const APP0: u8 = 0xE0;

    pub fn is_rst(m: u8) -> bool {
        (0xD0..=0xD7).contains(&m)
    }

    pub fn name(m: u8) -> &'static str {
        match m {
            SOI => "SOI",
            EOI => "EOI",
            SOS => "SOS",
            DQT => "DQT",
            DHT => "DHT",
            DRI => "DRI",
            SOF0 => "SOF0",
            0xC1 => "SOF1",
            0xC2 => "SOF2",
            0xC3 => "SOF3",
            APP0 => "APP0",
            0xD0..=0xD7 => "RST",
            0xE1..=0xEF => "APPn",
            0xFE => "COM",
            _ => "marker",
        }
    }
}

/// Walks the marker structure of a JPEG stream and checks that every
/// length-bearing segment's length field matches its byte span, that
/// entropy-coded data only contains stuffed bytes or restart markers, and
/// that the stream is framed by SOI ... EOI with nothing trailing.
pub fn validate_structure(bytes: &[u8]) -> Result<Vec<Segment>> {
    if bytes.len() < 4 || bytes[0] != 0xFF || bytes[1] != marker::SOI {
        return Err(Error::decode("SOI", "stream does not start with SOI"));
    }
    let mut segments = alloc::vec![Segment {
        marker: marker::SOI,
        offset: 0,
        length: 0,
    }];
    let mut pos = 2;
    loop {
        if pos + 1 >= bytes.len() {
            return Err(Error::decode("EOI", "stream ended before EOI"));
        }
        if bytes[pos] != 0xFF {
            return Err(Error::decode(
                "marker",
                format!("expected marker at offset {pos}, found 0x{:02X}", bytes[pos]),
            ));
        }
        let m = bytes[pos + 1];
        if m == marker::EOI {
            segments.push(Segment {
                marker: m,
                offset: pos,
                length: 0,
            });
            if pos + 2 != bytes.len() {
                return Err(Error::decode("EOI", "trailing bytes after EOI"));
            }
            return Ok(segments);
        }
        if pos + 3 >= bytes.len() {
            return Err(Error::decode(marker::name(m), "truncated length field"));
        }
        let length = u16::from_be_bytes([bytes[pos + 2], bytes[pos + 3]]);
        if length < 2 || pos + 2 + length as usize > bytes.len() {
            return Err(Error::decode(
                marker::name(m),
                format!("length field {length} exceeds stream"),
            ));
        }
        segments.push(Segment {
            marker: m,
            offset: pos,
            length,
        });
        pos += 2 + length as usize;
        if m == marker::SOS {
            // Entropy-coded segment: runs until a marker that is not a stuffed
            // zero byte or a restart marker.
            loop {
                if pos + 1 >= bytes.len() {
                    return Err(Error::decode("SOS", "entropy data runs past end of stream"));
                }
                if bytes[pos] == 0xFF {
                    let next = bytes[pos + 1];
                    if next == 0x00 {
                        pos += 2;
                    } else if marker::is_rst(next) {
                        segments.push(Segment {
                            marker: next,
                            offset: pos,
                            length: 0,
                        });
                        pos += 2;
                    } else {
                        break;
                    }
                } else {
                    pos += 1;
                }
            }
        }
    }
}
