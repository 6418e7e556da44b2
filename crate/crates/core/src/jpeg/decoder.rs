use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::dct::DctBasis;
use super::marker;
use super::tables::ZIGZAG;
use crate::image::ImageU8;
use crate::{Error, Result};

#[derive(Clone)]
struct HuffmanDecoder {
    // Per code length 1..=16: largest code of that length (or -1) and the
    // index of its first symbol in `values`.
    maxcode: [i32; 17],
    mincode: [i32; 17],
    valptr: [usize; 17],
    values: Vec<u8>,
}

impl HuffmanDecoder {
    fn new(bits: &[u8; 16], values: Vec<u8>) -> Result<Self> {
        let total: usize = bits.iter().map(|&b| b as usize).sum();
        if total != values.len() || total > 256 {
            return Err(Error::decode("DHT", "code counts do not match symbol list"));
        }
        let mut dec = HuffmanDecoder {
            maxcode: [-1; 17],
            mincode: [0; 17],
            valptr: [0; 17],
            values,
        };
        let mut code = 0i32;
        let mut k = 0usize;
        for len in 1..=16 {
            let n = bits[len - 1] as usize;
            if n > 0 {
                dec.valptr[len] = k;
                dec.mincode[len] = code;
                code += n as i32;
                k += n;
                dec.maxcode[len] = code - 1;
            }
            if code > (1 << len) {
                return Err(Error::decode("DHT", "over-subscribed Huffman table"));
            }
            code <<= 1;
        }
        Ok(dec)
    }
}

struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    acc: u32,
    nbits: u32,
    /// Set once a marker has been hit inside entropy data.
    hit_marker: bool,
}

impl<'a> BitReader<'a> {
    fn new(data: &'a [u8], pos: usize) -> Self {
        BitReader {
            data,
            pos,
            acc: 0,
            nbits: 0,
            hit_marker: false,
        }
    }

    fn fill(&mut self) {
        while self.nbits <= 24 {
            let mut byte = 0u8;
            if !self.hit_marker && self.pos < self.data.len() {
                byte = self.data[self.pos];
                if byte == 0xFF {
                    let next = self.data.get(self.pos + 1).copied().unwrap_or(0xD9);
                    if next == 0x00 {
                        self.pos += 2;
                    } else {
                        self.hit_marker = true;
                        byte = 0;
                    }
                } else {
                    self.pos += 1;
                }
            }
            self.acc |= (byte as u32) << (24 - self.nbits);
            self.nbits += 8;
        }
    }

    #[inline]
    fn bit(&mut self) -> u32 {
        if self.nbits == 0 {
            self.fill();
        }
        let b = self.acc >> 31;
        self.acc <<= 1;
        self.nbits -= 1;
        b
    }

    fn bits(&mut self, n: u32) -> u32 {
        if n == 0 {
            return 0;
        }
        if self.nbits < n {
            self.fill();
        }
        let v = self.acc >> (32 - n);
        self.acc <<= n;
        self.nbits -= n;
        v
    }

    fn decode(&mut self, table: &HuffmanDecoder) -> Result<u8> {
        let mut code = 0i32;
        for len in 1..=16 {
            code = (code << 1) | self.bit() as i32;
            if code <= table.maxcode[len] {
                let idx = table.valptr[len] + (code - table.mincode[len]) as usize;
                return Ok(table.values[idx]);
            }
        }
        Err(Error::decode("SOS", "invalid Huffman code in entropy data"))
    }

    fn receive_extend(&mut self, cat: u32) -> i32 {
        if cat == 0 {
            return 0;
        }
        let v = self.bits(cat) as i32;
        if v < (1 << (cat - 1)) {
            v - (1 << cat) + 1
        } else {
            v
        }
    }

    /// Discards buffered bits and consumes the expected RSTn marker.
    fn restart(&mut self, expected: u8) -> Result<()> {
        self.acc = 0;
        self.nbits = 0;
        self.hit_marker = false;
        // Skip any fill bytes before the marker.
        while self.pos + 1 < self.data.len() && !(self.data[self.pos] == 0xFF && self.data[self.pos + 1] != 0x00) {
            self.pos += 1;
        }
        if self.pos + 1 >= self.data.len() || self.data[self.pos + 1] != expected {
            return Err(Error::decode("RST", format!("expected RST{}", expected - 0xD0)));
        }
        self.pos += 2;
        Ok(())
    }

    /// Byte offset of the next marker after the entropy-coded data.
    fn end_position(&self) -> usize {
        let mut p = self.pos;
        while p + 1 < self.data.len() {
            if self.data[p] == 0xFF && self.data[p + 1] != 0x00 && !marker::is_rst(self.data[p + 1]) {
                return p;
            }
            p += 1;
        }
        self.data.len()
    }
}

#[derive(Clone)]
struct FrameComponent {
    id: u8,
    h: usize,
    v: usize,
    tq: usize,
    dc_table: usize,
    ac_table: usize,
}

/// Decodes a baseline sequential Huffman JPEG (1 or 3 components).
///
/// Progressive, lossless, hierarchical and arithmetic-coded frames and
/// 16-bit quantization tables are rejected with [`Error::Unsupported`].
pub fn decode_baseline(bytes: &[u8]) -> Result<ImageU8> {
    if bytes.len() < 2 || bytes[0] != 0xFF || bytes[1] != marker::SOI {
        return Err(Error::decode("SOI", "missing start-of-image marker"));
    }
    let mut pos = 2;
    let mut qtables: [Option<[u16; 64]>; 4] = [None; 4];
    let mut dc_tables: [Option<HuffmanDecoder>; 4] = [None, None, None, None];
    let mut ac_tables: [Option<HuffmanDecoder>; 4] = [None, None, None, None];
    let mut frame: Option<(usize, usize, Vec<FrameComponent>)> = None;
    let mut restart_interval = 0usize;
    let mut planes: Option<Vec<Vec<u8>>> = None;

    loop {
        // Skip fill bytes.
        while pos < bytes.len() && bytes[pos] == 0xFF && bytes.get(pos + 1) == Some(&0xFF) {
            pos += 1;
        }
        if pos + 1 >= bytes.len() {
            return Err(Error::decode("EOI", "stream ended without end-of-image marker"));
        }
        if bytes[pos] != 0xFF {
            return Err(Error::decode("marker", format!("expected marker at offset {pos}")));
        }
        let m = bytes[pos + 1];
        pos += 2;
        if m == marker::EOI {
            break;
        }
        if marker::is_rst(m) {
            continue;
        }
        let name = marker::name(m);
        if pos + 2 > bytes.len() {
            return Err(Error::decode(name, "truncated segment length"));
        }
        let len = u16::from_be_bytes([bytes[pos], bytes[pos + 1]]) as usize;
        if len < 2 || pos + len > bytes.len() {
            return Err(Error::decode(name, "segment length exceeds stream"));
        }
        let seg = &bytes[pos + 2..pos + len];
        pos += len;
        match m {
            marker::DQT => parse_dqt(seg, &mut qtables)?,
            marker::DHT => parse_dht(seg, &mut dc_tables, &mut ac_tables)?,
            marker::DRI => {
                if seg.len() != 2 {
                    return Err(Error::decode("DRI", "bad length"));
                }
                restart_interval = u16::from_be_bytes([seg[0], seg[1]]) as usize;
            }
            marker::SOF0 | 0xC1 => frame = Some(parse_sof(seg)?),
            0xC2 | 0xC3 | 0xC5..=0xC7 | 0xC9..=0xCB | 0xCD..=0xCF => {
                return Err(Error::Unsupported(format!(
                    "{} frames (marker 0xFF{m:02X}) are not baseline",
                    if m == 0xC2 || m == 0xC6 || m == 0xCA || m == 0xCE {
                        "progressive"
                    } else if m >= 0xC9 {
                        "arithmetic-coded"
                    } else {
                        "lossless/hierarchical"
                    }
                )));
            }
            marker::SOS => {
                let (w, h, comps) = frame
                    .as_ref()
                    .ok_or_else(|| Error::decode("SOS", "scan before frame header"))?;
                let scan = parse_sos(seg, comps)?;
                let decoded = decode_scan(
                    bytes,
                    pos,
                    *w,
                    *h,
                    &scan,
                    &qtables,
                    &dc_tables,
                    &ac_tables,
                    restart_interval,
                )?;
                pos = decoded.1;
                planes = Some(decoded.0);
            }
            _ => {} // APPn, COM and friends are skipped.
        }
    }

    let (width, height, comps) = frame.ok_or_else(|| Error::decode("SOF0", "no frame header"))?;
    let planes = planes.ok_or_else(|| Error::decode("SOS", "no scan data"))?;
    assemble(width, height, &comps, &planes)
}

fn parse_dqt(mut seg: &[u8], qtables: &mut [Option<[u16; 64]>; 4]) -> Result<()> {
    while !seg.is_empty() {
        let pq = seg[0] >> 4;
        let tq = (seg[0] & 0x0F) as usize;
        if pq != 0 {
            return Err(Error::Unsupported("16-bit quantization tables".into()));
        }
        if tq > 3 || seg.len() < 65 {
            return Err(Error::decode("DQT", "malformed table"));
        }
        let mut t = [0u16; 64];
        for (k, &pos) in ZIGZAG.iter().enumerate() {
            t[pos] = seg[1 + k] as u16;
        }
        qtables[tq] = Some(t);
        seg = &seg[65..];
    }
    Ok(())
}

fn parse_dht(mut seg: &[u8], dc: &mut [Option<HuffmanDecoder>; 4], ac: &mut [Option<HuffmanDecoder>; 4]) -> Result<()> {
    while !seg.is_empty() {
        if seg.len() < 17 {
            return Err(Error::decode("DHT", "truncated table"));
        }
        let class = seg[0] >> 4;
        let id = (seg[0] & 0x0F) as usize;
        if class > 1 || id > 3 {
            return Err(Error::decode("DHT", "bad table class/id"));
        }
        let mut bits = [0u8; 16];
        bits.copy_from_slice(&seg[1..17]);
        let total: usize = bits.iter().map(|&b| b as usize).sum();
        if seg.len() < 17 + total {
            return Err(Error::decode("DHT", "truncated symbol list"));
        }
        let table = HuffmanDecoder::new(&bits, seg[17..17 + total].to_vec())?;
        if class == 0 {
            dc[id] = Some(table);
        } else {
            ac[id] = Some(table);
        }
        seg = &seg[17 + total..];
    }
    Ok(())
}

fn parse_sof(seg: &[u8]) -> Result<(usize, usize, Vec<FrameComponent>)> {
    if seg.len() < 6 {
        return Err(Error::decode("SOF0", "truncated frame header"));
    }
    if seg[0] != 8 {
        return Err(Error::Unsupported(format!("{}-bit sample precision", seg[0])));
    }
    let height = u16::from_be_bytes([seg[1], seg[2]]) as usize;
    let width = u16::from_be_bytes([seg[3], seg[4]]) as usize;
    let n = seg[5] as usize;
    if width == 0 || height == 0 {
        return Err(Error::Unsupported("zero or deferred frame dimensions".into()));
    }
    if n != 1 && n != 3 {
        return Err(Error::Unsupported(format!("{n}-component frames")));
    }
    if seg.len() != 6 + 3 * n {
        return Err(Error::decode("SOF0", "component list length mismatch"));
    }
    let mut comps = Vec::with_capacity(n);
    for i in 0..n {
        let c = &seg[6 + 3 * i..9 + 3 * i];
        let (h, v) = ((c[1] >> 4) as usize, (c[1] & 0x0F) as usize);
        if !(1..=2).contains(&h) || !(1..=2).contains(&v) || c[2] > 3 {
            return Err(Error::Unsupported(format!("sampling factors {h}x{v}")));
        }
        comps.push(FrameComponent {
            id: c[0],
            h,
            v,
            tq: c[2] as usize,
            dc_table: 0,
            ac_table: 0,
        });
    }
    Ok((width, height, comps))
}

fn parse_sos(seg: &[u8], comps: &[FrameComponent]) -> Result<Vec<FrameComponent>> {
    let n = *seg.first().ok_or_else(|| Error::decode("SOS", "empty header"))? as usize;
    if seg.len() != 1 + 2 * n + 3 {
        return Err(Error::decode("SOS", "header length mismatch"));
    }
    if n != comps.len() {
        return Err(Error::Unsupported("non-interleaved multi-scan streams".into()));
    }
    let mut scan = Vec::with_capacity(n);
    for i in 0..n {
        let id = seg[1 + 2 * i];
        let tables = seg[2 + 2 * i];
        let mut c = comps
            .iter()
            .find(|c| c.id == id)
            .cloned()
            .ok_or_else(|| Error::decode("SOS", "scan references unknown component"))?;
        c.dc_table = (tables >> 4) as usize;
        c.ac_table = (tables & 0x0F) as usize;
        if c.dc_table > 3 || c.ac_table > 3 {
            return Err(Error::decode("SOS", "bad table selector"));
        }
        scan.push(c);
    }
    let (ss, se, a) = (seg[1 + 2 * n], seg[2 + 2 * n], seg[3 + 2 * n]);
    if ss != 0 || se != 63 || a != 0 {
        return Err(Error::Unsupported(
            "spectral selection / successive approximation".into(),
        ));
    }
    Ok(scan)
}

#[allow(clippy::too_many_arguments)]
fn decode_scan(
    bytes: &[u8],
    start: usize,
    width: usize,
    height: usize,
    comps: &[FrameComponent],
    qtables: &[Option<[u16; 64]>; 4],
    dc_tables: &[Option<HuffmanDecoder>; 4],
    ac_tables: &[Option<HuffmanDecoder>; 4],
    restart_interval: usize,
) -> Result<(Vec<Vec<u8>>, usize)> {
    let hmax = comps.iter().map(|c| c.h).max().unwrap_or(1);
    let vmax = comps.iter().map(|c| c.v).max().unwrap_or(1);
    let mcus_x = width.div_ceil(8 * hmax);
    let mcus_y = height.div_ceil(8 * vmax);
    let single = comps.len() == 1;
    // A single-component scan is non-interleaved: one block per MCU.
    let (mcus_x, mcus_y) = if single {
        (width.div_ceil(8), height.div_ceil(8))
    } else {
        (mcus_x, mcus_y)
    };

    let mut resolved = Vec::with_capacity(comps.len());
    for c in comps {
        let q = qtables[c.tq].ok_or_else(|| Error::decode("DQT", "missing quantization table"))?;
        let dc = dc_tables[c.dc_table]
            .as_ref()
            .ok_or_else(|| Error::decode("DHT", "missing DC table"))?;
        let ac = ac_tables[c.ac_table]
            .as_ref()
            .ok_or_else(|| Error::decode("DHT", "missing AC table"))?;
        let (bh, bv) = if single { (1, 1) } else { (c.h, c.v) };
        let plane_w = mcus_x * bh * 8;
        let plane_h = mcus_y * bv * 8;
        resolved.push((q, dc, ac, bh, bv, plane_w, vec![0u8; plane_w * plane_h]));
    }

    let basis = DctBasis::new();
    let mut reader = BitReader::new(bytes, start);
    let mut pred = vec![0i32; comps.len()];
    let mut rst = 0u8;
    let total = mcus_x * mcus_y;
    for mcu in 0..total {
        if restart_interval > 0 && mcu > 0 && mcu % restart_interval == 0 {
            reader.restart(0xD0 + rst)?;
            rst = (rst + 1) & 7;
            pred.iter_mut().for_each(|p| *p = 0);
        }
        let (mx, my) = (mcu % mcus_x, mcu / mcus_x);
        for (ci, (q, dc, ac, bh, bv, plane_w, plane)) in resolved.iter_mut().enumerate() {
            for v in 0..*bv {
                for h in 0..*bh {
                    let mut coeffs = [0.0f64; 64];
                    let cat = reader.decode(dc)? as u32;
                    if cat > 11 {
                        return Err(Error::decode("SOS", "DC category out of range"));
                    }
                    pred[ci] += reader.receive_extend(cat);
                    coeffs[0] = (pred[ci] * q[0] as i32) as f64;
                    let mut k = 1;
                    while k < 64 {
                        let rs = reader.decode(ac)?;
                        let (run, size) = ((rs >> 4) as usize, (rs & 0x0F) as u32);
                        if size == 0 {
                            if run == 15 {
                                k += 16;
                                continue;
                            }
                            break;
                        }
                        k += run;
                        if k > 63 {
                            return Err(Error::decode("SOS", "AC run past end of block"));
                        }
                        let pos = ZIGZAG[k];
                        coeffs[pos] = (reader.receive_extend(size) * q[pos] as i32) as f64;
                        k += 1;
                    }
                    let pixels = basis.inverse(&coeffs);
                    let ox = (mx * *bh + h) * 8;
                    let oy = (my * *bv + v) * 8;
                    for y in 0..8 {
                        for x in 0..8 {
                            let val = Float::round(pixels[y * 8 + x] + 128.0).clamp(0.0, 255.0);
                            plane[(oy + y) * *plane_w + ox + x] = val as u8;
                        }
                    }
                }
            }
        }
    }
    let end = reader.end_position();
    let planes = resolved.into_iter().map(|(.., plane)| plane).collect();
    Ok((planes, end))
}

fn assemble(width: usize, height: usize, comps: &[FrameComponent], planes: &[Vec<u8>]) -> Result<ImageU8> {
    if comps.len() == 1 {
        let plane_w = width.div_ceil(8) * 8;
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            data.extend_from_slice(&planes[0][y * plane_w..y * plane_w + width]);
        }
        return ImageU8::new(width, height, 1, data);
    }
    let hmax = comps.iter().map(|c| c.h).max().unwrap_or(1);
    let vmax = comps.iter().map(|c| c.v).max().unwrap_or(1);
    let mcus_x = width.div_ceil(8 * hmax);
    let plane_ws: Vec<usize> = comps.iter().map(|c| mcus_x * c.h * 8).collect();
    let mut data = Vec::with_capacity(width * height * 3);
    for y in 0..height {
        for x in 0..width {
            let mut s = [0.0f64; 3];
            for (i, c) in comps.iter().enumerate() {
                let sx = x * c.h / hmax;
                let sy = y * c.v / vmax;
                s[i] = planes[i][sy * plane_ws[i] + sx] as f64;
            }
            let (yy, cb, cr) = (s[0], s[1] - 128.0, s[2] - 128.0);
            let r = yy + 1.402 * cr;
            let g = yy - 0.344_136 * cb - 0.714_136 * cr;
            let b = yy + 1.772 * cb;
            for v in [r, g, b] {
                data.push(Float::round(v).clamp(0.0, 255.0) as u8);
            }
        }
    }
    ImageU8::new(width, height, 3, data)
}
