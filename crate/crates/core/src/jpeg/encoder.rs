use alloc::vec::Vec;

use num_traits::Float;

use super::dct::DctBasis;
use super::tables::{self, HuffmanSpec, ZIGZAG};
use super::{marker, scale_quant_table, EncoderConfig, QuantTable, Subsampling};
use crate::image::ImageU8;
use crate::{Error, Result};

/// Canonical Huffman code lookup built from a [`HuffmanSpec`].
struct HuffmanCodes {
    code: [u16; 256],
    size: [u8; 256],
}

impl HuffmanCodes {
    fn new(spec: &HuffmanSpec) -> Self {
        let mut codes = HuffmanCodes {
            code: [0; 256],
            size: [0; 256],
        };
        let mut code = 0u16;
        let mut k = 0;
        for (len_minus_one, &count) in spec.bits.iter().enumerate() {
            for _ in 0..count {
                let sym = spec.values[k] as usize;
                codes.code[sym] = code;
                codes.size[sym] = len_minus_one as u8 + 1;
                code += 1;
                k += 1;
            }
            code <<= 1;
        }
        codes
    }
}

struct BitWriter {
    out: Vec<u8>,
    acc: u32,
    nbits: u32,
}

impl BitWriter {
    fn new(out: Vec<u8>) -> Self {
        BitWriter { out, acc: 0, nbits: 0 }
    }

    #[inline]
    fn put(&mut self, bits: u32, count: u32) {
        debug_assert!(count <= 16);
        self.acc = (self.acc << count) | (bits & ((1 << count) - 1));
        self.nbits += count;
        while self.nbits >= 8 {
            let byte = (self.acc >> (self.nbits - 8)) as u8;
            self.out.push(byte);
            if byte == 0xFF {
                self.out.push(0x00);
            }
            self.nbits -= 8;
        }
        self.acc &= (1 << self.nbits) - 1;
    }

    /// Pads the final partial byte with 1-bits.
    fn flush(&mut self) {
        if self.nbits > 0 {
            let pad = 8 - self.nbits;
            self.put((1 << pad) - 1, pad);
        }
    }

    fn marker(&mut self, m: u8) {
        self.flush();
        self.out.push(0xFF);
        self.out.push(m);
    }
}

/// Number of bits needed for |v| (the JPEG magnitude category).
#[inline]
fn category(v: i32) -> u32 {
    32 - v.unsigned_abs().leading_zeros()
}

/// Category bits for a signed value: negatives are stored as one's complement.
#[inline]
fn magnitude_bits(v: i32, cat: u32) -> u32 {
    if v < 0 {
        (v - 1) as u32 & ((1 << cat) - 1)
    } else {
        v as u32
    }
}

struct Component {
    id: u8,
    h: usize,
    v: usize,
    quant_index: usize,
    dc: HuffmanCodes,
    ac: HuffmanCodes,
    table_class: u8,
}

/// YCbCr plane sampler with edge replication.
struct Sampler<'a> {
    img: &'a ImageU8,
}

impl Sampler<'_> {
    #[inline]
    fn ycbcr(&self, x: usize, y: usize) -> [f64; 3] {
        let x = x.min(self.img.width() - 1);
        let y = y.min(self.img.height() - 1);
        let p = self.img.pixel(x, y);
        if p.len() == 1 {
            return [p[0] as f64, 128.0, 128.0];
        }
        let (r, g, b) = (p[0] as f64, p[1] as f64, p[2] as f64);
        [
            0.299 * r + 0.587 * g + 0.114 * b,
            -0.168_736 * r - 0.331_264 * g + 0.5 * b + 128.0,
            0.5 * r - 0.418_688 * g - 0.081_312 * b + 128.0,
        ]
    }

    /// One 8x8 block of component `comp` at block coordinates `(bx, by)`
    /// in that component's sample grid, level-shifted by -128.
    fn block(&self, comp: usize, bx: usize, by: usize, subsampled: bool, out: &mut [f64; 64]) {
        let (w, h) = (self.img.width(), self.img.height());
        if !subsampled {
            for j in 0..8 {
                for i in 0..8 {
                    out[j * 8 + i] = self.ycbcr(bx * 8 + i, by * 8 + j)[comp] - 128.0;
                }
            }
            return;
        }
        // Chroma grid is ceil(w/2) x ceil(h/2); positions past it replicate the
        // last chroma sample.
        let cw = w.div_ceil(2);
        let ch = h.div_ceil(2);
        for j in 0..8 {
            for i in 0..8 {
                let cx = (bx * 8 + i).min(cw - 1);
                let cy = (by * 8 + j).min(ch - 1);
                let mut acc = 0.0;
                for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                    acc += self.ycbcr(2 * cx + dx, 2 * cy + dy)[comp];
                }
                out[j * 8 + i] = acc * 0.25 - 128.0;
            }
        }
    }
}

fn write_segment(out: &mut Vec<u8>, m: u8, payload: &[u8]) {
    out.push(0xFF);
    out.push(m);
    out.extend_from_slice(&((payload.len() + 2) as u16).to_be_bytes());
    out.extend_from_slice(payload);
}

fn write_dht(out: &mut Vec<u8>, class_and_id: u8, spec: &HuffmanSpec) {
    let mut payload = Vec::with_capacity(17 + spec.values.len());
    payload.push(class_and_id);
    payload.extend_from_slice(&spec.bits);
    payload.extend_from_slice(spec.values);
    write_segment(out, marker::DHT, &payload);
}

/// Encodes `img` as a baseline sequential JFIF stream.
///
/// Single-channel images produce a one-component grayscale stream;
/// three-channel images are converted to full-range BT.601 YCbCr.
pub fn encode_baseline(img: &ImageU8, cfg: &EncoderConfig) -> Result<Vec<u8>> {
    let (width, height) = (img.width(), img.height());
    if width > u16::MAX as usize || height > u16::MAX as usize {
        return Err(Error::Unsupported(alloc::format!(
            "{width}x{height} exceeds the 65535 JPEG dimension limit"
        )));
    }
    let luma_q = scale_quant_table(&QuantTable::luminance(), cfg.quality)?;
    let chroma_q = scale_quant_table(&QuantTable::chrominance(), cfg.quality)?;
    let color = img.channels() == 3;
    let subsample = color && cfg.subsampling == Subsampling::S420;

    let luma_factor = if subsample { 2 } else { 1 };
    let mut components = alloc::vec![Component {
        id: 1,
        h: luma_factor,
        v: luma_factor,
        quant_index: 0,
        dc: HuffmanCodes::new(&tables::DC_LUMA),
        ac: HuffmanCodes::new(&tables::AC_LUMA),
        table_class: 0,
    }];
    if color {
        for id in [2u8, 3] {
            components.push(Component {
                id,
                h: 1,
                v: 1,
                quant_index: 1,
                dc: HuffmanCodes::new(&tables::DC_CHROMA),
                ac: HuffmanCodes::new(&tables::AC_CHROMA),
                table_class: 1,
            });
        }
    }

    let mut out = Vec::with_capacity(1024 + width * height / 2);
    out.extend_from_slice(&[0xFF, marker::SOI]);
    write_segment(
        &mut out,
        marker::APP0,
        &[b'J', b'F', b'I', b'F', 0, 1, 1, 0, 0, 1, 0, 1, 0, 0],
    );

    let mut dqt = alloc::vec![0u8];
    dqt.extend_from_slice(luma_q.zigzag());
    write_segment(&mut out, marker::DQT, &dqt);
    if color {
        let mut dqt = alloc::vec![1u8];
        dqt.extend_from_slice(chroma_q.zigzag());
        write_segment(&mut out, marker::DQT, &dqt);
    }

    let mut sof = alloc::vec![8u8];
    sof.extend_from_slice(&(height as u16).to_be_bytes());
    sof.extend_from_slice(&(width as u16).to_be_bytes());
    sof.push(components.len() as u8);
    for c in &components {
        sof.extend_from_slice(&[c.id, ((c.h as u8) << 4) | c.v as u8, c.quant_index as u8]);
    }
    write_segment(&mut out, marker::SOF0, &sof);

    write_dht(&mut out, 0x00, &tables::DC_LUMA);
    write_dht(&mut out, 0x10, &tables::AC_LUMA);
    if color {
        write_dht(&mut out, 0x01, &tables::DC_CHROMA);
        write_dht(&mut out, 0x11, &tables::AC_CHROMA);
    }

    if cfg.restart_interval > 0 {
        write_segment(&mut out, marker::DRI, &cfg.restart_interval.to_be_bytes());
    }

    let mut sos = alloc::vec![components.len() as u8];
    for c in &components {
        sos.extend_from_slice(&[c.id, (c.table_class << 4) | c.table_class]);
    }
    sos.extend_from_slice(&[0, 63, 0]);
    write_segment(&mut out, marker::SOS, &sos);

    // Reciprocal-free quantizers in natural order, indexed per component.
    let quant = [luma_q.natural(), chroma_q.natural()];
    let basis = DctBasis::new();
    let sampler = Sampler { img };
    let mcu_w = 8 * luma_factor;
    let mcu_h = 8 * luma_factor;
    let mcus_x = width.div_ceil(mcu_w);
    let mcus_y = height.div_ceil(mcu_h);

    let mut writer = BitWriter::new(out);
    let mut pred = [0i32; 3];
    let mut block = [0.0f64; 64];
    let mut mcu_count = 0usize;
    let mut rst_index = 0u8;
    let restart = cfg.restart_interval as usize;

    for my in 0..mcus_y {
        for mx in 0..mcus_x {
            if restart > 0 && mcu_count > 0 && mcu_count.is_multiple_of(restart) {
                writer.marker(0xD0 + rst_index);
                rst_index = (rst_index + 1) & 7;
                pred = [0; 3];
            }
            for (ci, comp) in components.iter().enumerate() {
                let chroma_subsampled = subsample && ci > 0;
                for v in 0..comp.v {
                    for h in 0..comp.h {
                        let bx = mx * comp.h + h;
                        let by = my * comp.v + v;
                        sampler.block(ci, bx, by, chroma_subsampled, &mut block);
                        let coeffs = basis.forward(&block);
                        let q = &quant[comp.quant_index];
                        let mut zz = [0i32; 64];
                        for (k, &pos) in ZIGZAG.iter().enumerate() {
                            zz[k] = Float::round(coeffs[pos] / q[pos] as f64) as i32;
                        }
                        encode_block(&mut writer, &zz, &mut pred[ci], comp);
                    }
                }
            }
            mcu_count += 1;
        }
    }
    writer.flush();
    let mut out = writer.out;
    out.extend_from_slice(&[0xFF, marker::EOI]);
    Ok(out)
}

fn encode_block(w: &mut BitWriter, zz: &[i32; 64], pred: &mut i32, comp: &Component) {
    let diff = zz[0] - *pred;
    *pred = zz[0];
    let cat = category(diff);
    w.put(comp.dc.code[cat as usize] as u32, comp.dc.size[cat as usize] as u32);
    if cat > 0 {
        w.put(magnitude_bits(diff, cat), cat);
    }

    let mut run = 0u32;
    for &coef in &zz[1..] {
        if coef == 0 {
            run += 1;
            continue;
        }
        while run > 15 {
            w.put(comp.ac.code[0xF0] as u32, comp.ac.size[0xF0] as u32);
            run -= 16;
        }
        let cat = category(coef);
        let sym = ((run << 4) | cat) as usize;
        w.put(comp.ac.code[sym] as u32, comp.ac.size[sym] as u32);
        w.put(magnitude_bits(coef, cat), cat);
        run = 0;
    }
    if run > 0 {
        w.put(comp.ac.code[0x00] as u32, comp.ac.size[0x00] as u32);
    }
}
