//! Reference 2D convolution and the two layer-level rewrites used to run a
//! pretrained VAE at a coarser latent stride without retraining:
//!
//! * [`dilate_first_conv`]: a dilation-2 kernel with doubled stride on a 2x
//!   nearest-upsampled input reproduces the original conv on the original
//!   input (the encoder-side duality).
//! * [`partitioned_upsample_conv`]: upsample-then-convolve evaluated tile by
//!   tile, each tile reading its interior plus a halo, so peak scratch memory
//!   follows the tile size instead of the full upsampled map.
//!
//! All variants share one accumulation routine (`f64` accumulators, taps in
//! a fixed order, out-of-image taps skipped), which makes tiled and monolithic
//! outputs bitwise identical rather than merely close.

pub mod check;

use alloc::format;
use alloc::vec::Vec;

use num_traits::Float;

use crate::blob::Blob;
use crate::tensor::Tensor;
use crate::{Error, Result};

/// Cross-correlation weights `(out_ch, in_ch, kh, kw)` with zero padding.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvSpec<T = f32> {
    pub out_ch: usize,
    pub in_ch: usize,
    pub kh: usize,
    pub kw: usize,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
    pub stride: (usize, usize),
    pub dilation: (usize, usize),
    pub padding: (usize, usize),
}

/// `floor((n + 2p - d(k-1) - 1) / s) + 1`, or `None` when no output fits.
pub fn conv_output_dim(n: usize, k: usize, stride: usize, dilation: usize, padding: usize) -> Option<usize> {
    let span = dilation * (k - 1) + 1;
    let padded = n + 2 * padding;
    if padded < span || stride == 0 {
        return None;
    }
    Some((padded - span) / stride + 1)
}

impl<T: Float> ConvSpec<T> {
    pub fn new((out_ch, in_ch, kh, kw): (usize, usize, usize, usize), weights: Vec<T>, bias: Vec<T>) -> Result<Self> {
        let spec = ConvSpec {
            out_ch,
            in_ch,
            kh,
            kw,
            weights,
            bias,
            stride: (1, 1),
            dilation: (1, 1),
            padding: (0, 0),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_stride(mut self, sy: usize, sx: usize) -> Self {
        self.stride = (sy, sx);
        self
    }

    pub fn with_dilation(mut self, dy: usize, dx: usize) -> Self {
        self.dilation = (dy, dx);
        self
    }

    pub fn with_padding(mut self, py: usize, px: usize) -> Self {
        self.padding = (py, px);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.kh == 0 || self.kw == 0 || self.out_ch == 0 || self.in_ch == 0 {
            return Err(Error::contract("kernel and channel dims must be >= 1"));
        }
        if self.weights.len() != self.out_ch * self.in_ch * self.kh * self.kw {
            return Err(Error::contract("weight count does not match kernel shape"));
        }
        if self.bias.len() != self.out_ch {
            return Err(Error::contract("bias length must equal out_ch"));
        }
        if self.stride.0 == 0 || self.stride.1 == 0 || self.dilation.0 == 0 || self.dilation.1 == 0 {
            return Err(Error::contract("stride and dilation must be >= 1"));
        }
        Ok(())
    }

    pub fn output_dims(&self, h: usize, w: usize) -> Option<(usize, usize)> {
        Some((
            conv_output_dim(h, self.kh, self.stride.0, self.dilation.0, self.padding.0)?,
            conv_output_dim(w, self.kw, self.stride.1, self.dilation.1, self.padding.1)?,
        ))
    }

    #[inline]
    fn weight(&self, o: usize, i: usize, ky: usize, kx: usize) -> T {
        self.weights[((o * self.in_ch + i) * self.kh + ky) * self.kw + kx]
    }

    /// Span of the dilated kernel minus one, per axis.
    pub fn reach(&self) -> (usize, usize) {
        (self.dilation.0 * (self.kh - 1), self.dilation.1 * (self.kw - 1))
    }

    pub fn cast<U: Float>(&self) -> ConvSpec<U> {
        let c = |v: &T| U::from(*v).unwrap_or_else(U::nan);
        ConvSpec {
            out_ch: self.out_ch,
            in_ch: self.in_ch,
            kh: self.kh,
            kw: self.kw,
            weights: self.weights.iter().map(c).collect(),
            bias: self.bias.iter().map(c).collect(),
            stride: self.stride,
            dilation: self.dilation,
            padding: self.padding,
        }
    }

    /// Flat blob: dims `[out, in, kh, kw, sy, sx, dy, dx, py, px]`, values
    /// are the weights followed by the bias as `f32`.
    pub fn to_blob(&self) -> Blob {
        let dims = [
            self.out_ch,
            self.in_ch,
            self.kh,
            self.kw,
            self.stride.0,
            self.stride.1,
            self.dilation.0,
            self.dilation.1,
            self.padding.0,
            self.padding.1,
        ]
        .iter()
        .map(|&d| d as u32)
        .collect();
        let values = self
            .weights
            .iter()
            .chain(&self.bias)
            .map(|v| v.to_f32().unwrap_or(f32::NAN))
            .collect();
        Blob { dims, values }
    }

    pub fn from_blob(blob: &Blob) -> Result<Self> {
        if blob.dims.len() != 10 {
            return Err(Error::decode("blob", "conv spec blob needs 10 dims"));
        }
        let d: Vec<usize> = blob.dims.iter().map(|&v| v as usize).collect();
        let nw = d[0] * d[1] * d[2] * d[3];
        if blob.values.len() != nw + d[0] {
            return Err(Error::decode("blob", "conv spec value count mismatch"));
        }
        let conv = |v: &f32| T::from(*v).unwrap_or_else(T::nan);
        let spec = ConvSpec {
            out_ch: d[0],
            in_ch: d[1],
            kh: d[2],
            kw: d[3],
            weights: blob.values[..nw].iter().map(conv).collect(),
            bias: blob.values[nw..].iter().map(conv).collect(),
            stride: (d[4], d[5]),
            dilation: (d[6], d[7]),
            padding: (d[8], d[9]),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Output region request for the shared accumulation kernel: output pixel
/// `(oy, ox)` reads input `(origin_y + oy*sy + dy*ky, origin_x + ox*sx + dx*kx)`.
struct Region {
    origin_y: isize,
    origin_x: isize,
    out_h: usize,
    out_w: usize,
}

/// Writes the region's outputs into `out` at row/col offset `(dst_y, dst_x)`.
fn correlate_into<T: Float>(
    input: &Tensor<T>,
    spec: &ConvSpec<T>,
    region: &Region,
    out: &mut Tensor<T>,
    (dst_y, dst_x): (usize, usize),
) {
    let (_, h, w) = input.shape();
    let (sy, sx) = spec.stride;
    let (dy, dx) = spec.dilation;
    for o in 0..spec.out_ch {
        let bias = spec.bias[o].to_f64().unwrap_or(f64::NAN);
        for oy in 0..region.out_h {
            let base_y = region.origin_y + (oy * sy) as isize;
            for ox in 0..region.out_w {
                let base_x = region.origin_x + (ox * sx) as isize;
                let mut acc = 0.0f64;
                for i in 0..spec.in_ch {
                    let plane = input.plane(i);
                    for ky in 0..spec.kh {
                        let y = base_y + (ky * dy) as isize;
                        if y < 0 || y >= h as isize {
                            continue;
                        }
                        let row = &plane[y as usize * w..(y as usize + 1) * w];
                        for kx in 0..spec.kw {
                            let x = base_x + (kx * dx) as isize;
                            if x < 0 || x >= w as isize {
                                continue;
                            }
                            let wv = spec.weight(o, i, ky, kx).to_f64().unwrap_or(f64::NAN);
                            let xv = row[x as usize].to_f64().unwrap_or(f64::NAN);
                            acc += wv * xv;
                        }
                    }
                }
                out[(o, dst_y + oy, dst_x + ox)] = T::from(acc + bias).unwrap_or_else(T::nan);
            }
        }
    }
}

/// Zero-padded cross-correlation with stride and dilation.
pub fn conv2d<T: Float>(x: &Tensor<T>, spec: &ConvSpec<T>) -> Result<Tensor<T>> {
    spec.validate()?;
    let (c, h, w) = x.shape();
    if c != spec.in_ch {
        return Err(Error::contract(format!(
            "input has {c} channels, kernel expects {}",
            spec.in_ch
        )));
    }
    let (out_h, out_w) = spec
        .output_dims(h, w)
        .ok_or_else(|| Error::contract(format!("kernel does not fit a {h}x{w} input")))?;
    let mut out = Tensor::zeros((spec.out_ch, out_h, out_w));
    let region = Region {
        origin_y: -(spec.padding.0 as isize),
        origin_x: -(spec.padding.1 as isize),
        out_h,
        out_w,
    };
    correlate_into(x, spec, &region, &mut out, (0, 0));
    Ok(out)
}

/// Nearest-neighbor 2x upsampling.
pub fn upsample2x<T: Float>(x: &Tensor<T>) -> Tensor<T> {
    x.upsample_nearest(2)
}

/// Rewrites an undilated conv for a `rate`x nearest-upsampled input:
/// dilation becomes `rate` and padding `rate * p`; weights and stride are
/// untouched. Applied with stride multiplied by `rate`, the result on
/// `upsample(x)` equals the original conv on `x`.
pub fn dilate_first_conv<T: Float>(spec: &ConvSpec<T>, rate: usize) -> Result<ConvSpec<T>> {
    spec.validate()?;
    if spec.dilation != (1, 1) {
        return Err(Error::contract("first conv is already dilated"));
    }
    if rate == 0 {
        return Err(Error::contract("dilation rate must be >= 1"));
    }
    let mut out = spec.clone();
    out.dilation = (rate, rate);
    out.padding = (spec.padding.0 * rate, spec.padding.1 * rate);
    Ok(out)
}

/// Tiling of a low-resolution input for [`partitioned_upsample_conv`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilePlan {
    pub input_h: usize,
    pub input_w: usize,
    pub tile_h: usize,
    pub tile_w: usize,
    /// Extra upsampled rows/cols read on each side of a tile's interior.
    pub halo: (usize, usize),
    /// Top-left corners of the tiles, row-major, in input coordinates.
    pub origins: Vec<(usize, usize)>,
}

impl TilePlan {
    /// Input-space rectangle `(y, x, h, w)` of tile `i`, clipped at the edges.
    pub fn tile(&self, i: usize) -> (usize, usize, usize, usize) {
        let (y, x) = self.origins[i];
        (
            y,
            x,
            self.tile_h.min(self.input_h - y),
            self.tile_w.min(self.input_w - x),
        )
    }

    pub fn len(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }

    /// Output rows/cols owned by tile `i` for an `out_h x out_w` result:
    /// the upsampled interior, with the first tile extended to 0 and the
    /// last to the output edge.
    pub fn owned_output(
        &self,
        i: usize,
        out_h: usize,
        out_w: usize,
    ) -> (core::ops::Range<usize>, core::ops::Range<usize>) {
        let (y, x, th, tw) = self.tile(i);
        let axis = |start: usize, len: usize, full: usize, out: usize| {
            let lo = if start == 0 { 0 } else { (2 * start).min(out) };
            let hi = if start + len == full {
                out
            } else {
                (2 * (start + len)).min(out)
            };
            lo..hi.max(lo)
        };
        (axis(y, th, self.input_h, out_h), axis(x, tw, self.input_w, out_w))
    }
}

/// Halo one axis needs: the read window of output rows `[2a, 2b)` spans
/// upsampled rows `[2a - p, 2b - 1 - p + reach]`.
fn required_halo(reach: usize, padding: usize) -> usize {
    padding.max(reach.saturating_sub(padding))
}

/// Tiles of at most `target_tile` input pixels per side. The halo is
/// `ceil(d(k-1)/2)` per axis on the upsampled grid, widened when the padding
/// is asymmetric relative to the kernel reach.
pub fn plan_tiles<T: Float>(
    input_h: usize,
    input_w: usize,
    spec: &ConvSpec<T>,
    target_tile: usize,
) -> Result<TilePlan> {
    if target_tile == 0 {
        return Err(Error::contract("tile size must be >= 1"));
    }
    if input_h == 0 || input_w == 0 {
        return Err(Error::contract("empty input"));
    }
    let (ry, rx) = spec.reach();
    let halo = (
        ry.div_ceil(2).max(required_halo(ry, spec.padding.0)),
        rx.div_ceil(2).max(required_halo(rx, spec.padding.1)),
    );
    let tile_h = target_tile.min(input_h);
    let tile_w = target_tile.min(input_w);
    let mut origins = Vec::new();
    for y in (0..input_h).step_by(tile_h) {
        for x in (0..input_w).step_by(tile_w) {
            origins.push((y, x));
        }
    }
    Ok(TilePlan {
        input_h,
        input_w,
        tile_h,
        tile_w,
        halo,
        origins,
    })
}

/// `conv2d(upsample2x(x), spec)` evaluated tile by tile.
///
/// Each tile extracts its input rectangle widened by the halo, upsamples
/// that window, convolves it and writes the owned output region. Only one
/// tile's upsampled window is alive at a time.
pub fn partitioned_upsample_conv<T: Float>(x: &Tensor<T>, spec: &ConvSpec<T>, plan: &TilePlan) -> Result<Tensor<T>> {
    let (out_h, out_w) = upsampled_output_dims(x, spec)?;
    let mut out = Tensor::zeros((spec.out_ch, out_h, out_w));
    partitioned_upsample_conv_into(x, spec, plan, &mut out)?;
    Ok(out)
}

fn upsampled_output_dims<T: Float>(x: &Tensor<T>, spec: &ConvSpec<T>) -> Result<(usize, usize)> {
    spec.validate()?;
    spec.output_dims(2 * x.height(), 2 * x.width())
        .ok_or_else(|| Error::contract("kernel does not fit the upsampled input"))
}

/// Like [`partitioned_upsample_conv`] but writes into a caller-owned output
/// of shape `(out_ch, out_h, out_w)`; the only allocations are per-tile.
pub fn partitioned_upsample_conv_into<T: Float>(
    x: &Tensor<T>,
    spec: &ConvSpec<T>,
    plan: &TilePlan,
    out: &mut Tensor<T>,
) -> Result<()> {
    let (out_h, out_w) = upsampled_output_dims(x, spec)?;
    if out.shape() != (spec.out_ch, out_h, out_w) {
        return Err(Error::contract("output tensor has the wrong shape"));
    }
    if spec.stride != (1, 1) {
        return Err(Error::Unsupported(
            "strided kernels in partitioned upsample-conv".into(),
        ));
    }
    let (c, h, w) = x.shape();
    if c != spec.in_ch {
        return Err(Error::contract("input channels do not match kernel"));
    }
    if plan.input_h != h || plan.input_w != w {
        return Err(Error::contract("tile plan was made for a different input size"));
    }
    let (ry, rx) = spec.reach();
    if plan.halo.0 < required_halo(ry, spec.padding.0) || plan.halo.1 < required_halo(rx, spec.padding.1) {
        return Err(Error::contract(format!(
            "halo {:?} too small for kernel reach ({ry}, {rx}) with padding {:?}",
            plan.halo, spec.padding
        )));
    }
    let (py, px) = (spec.padding.0 as isize, spec.padding.1 as isize);

    for t in 0..plan.len() {
        let (rows, cols) = plan.owned_output(t, out_h, out_w);
        if rows.is_empty() || cols.is_empty() {
            continue;
        }
        let (ty, tx, th, tw) = plan.tile(t);
        // Upsampled window: interior +- halo, clipped to the image.
        let win_y0 = (2 * ty).saturating_sub(plan.halo.0);
        let win_y1 = (2 * (ty + th) + plan.halo.0).min(2 * h);
        let win_x0 = (2 * tx).saturating_sub(plan.halo.1);
        let win_x1 = (2 * (tx + tw) + plan.halo.1).min(2 * w);
        // Reads of the owned region, clipped to the image, must stay inside.
        let need_y0 = (rows.start as isize - py).max(0) as usize;
        let need_y1 = ((rows.end - 1) as isize - py + ry as isize + 1).clamp(0, 2 * h as isize) as usize;
        let need_x0 = (cols.start as isize - px).max(0) as usize;
        let need_x1 = ((cols.end - 1) as isize - px + rx as isize + 1).clamp(0, 2 * w as isize) as usize;
        if need_y0 < win_y0 || need_y1 > win_y1 || need_x0 < win_x0 || need_x1 > win_x1 {
            return Err(Error::contract(format!("tile {t} reads outside its halo window")));
        }
        // Low-res rows/cols covering the window.
        let (ly0, ly1) = (win_y0 / 2, win_y1.div_ceil(2));
        let (lx0, lx1) = (win_x0 / 2, win_x1.div_ceil(2));
        let low = Tensor::from_fn((c, ly1 - ly0, lx1 - lx0), |ci, y, xx| x[(ci, ly0 + y, lx0 + xx)]);
        let local = low.upsample_nearest(2);
        drop(low);
        let (base_y, base_x) = (2 * ly0 as isize, 2 * lx0 as isize);
        let region = Region {
            origin_y: rows.start as isize - py - base_y,
            origin_x: cols.start as isize - px - base_x,
            out_h: rows.len(),
            out_w: cols.len(),
        };
        correlate_into(&local, spec, &region, out, (rows.start, cols.start));
    }
    Ok(())
}
