use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Range;

use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::blob::Blob;
use crate::tensor::Tensor;
use crate::{Error, Result};

const K: usize = 3;
const EMBED: usize = 3;

/// `conv3x3(c -> h) + b1 + E phi(t) -> tanh -> conv3x3(h -> c) + b2`,
/// zero padding 1, with `phi(t) = [t, sin(pi t), cos(pi t)]`.
///
/// Parameters live in one flat vector laid out as `w1 | b1 | E | w2 | b2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Denoiser {
    channels: usize,
    hidden: usize,
    params: Vec<f64>,
}

/// Activations kept from the forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub hidden: Tensor<f64>,
    pub phi: [f64; EMBED],
}

pub fn time_embedding(t: f64) -> [f64; EMBED] {
    [t, Float::sin(PI * t), Float::cos(PI * t)]
}

impl Denoiser {
    pub fn param_count(channels: usize, hidden: usize) -> usize {
        K * K * channels * hidden + hidden + EMBED * hidden + K * K * hidden * channels + channels
    }

    pub fn zeros(channels: usize, hidden: usize) -> Self {
        Denoiser {
            channels,
            hidden,
            params: vec![0.0; Self::param_count(channels, hidden)],
        }
    }

    /// Gaussian weights scaled by `1/sqrt(fan_in)`; biases and the time
    /// embedding start at zero.
    pub fn init<R: Rng + ?Sized>(channels: usize, hidden: usize, rng: &mut R) -> Self {
        let mut m = Self::zeros(channels, hidden);
        let std1 = 1.0 / Float::sqrt((K * K * channels) as f64);
        let std2 = 1.0 / Float::sqrt((K * K * hidden) as f64);
        let n1 = Normal::new(0.0, std1).expect("positive std");
        let n2 = Normal::new(0.0, std2).expect("positive std");
        let (r1, r2) = (m.w1_range(), m.w2_range());
        for v in &mut m.params[r1] {
            *v = n1.sample(rng);
        }
        for v in &mut m.params[r2] {
            *v = n2.sample(rng);
        }
        m
    }

    pub fn from_params(channels: usize, hidden: usize, params: Vec<f64>) -> Result<Self> {
        if params.len() != Self::param_count(channels, hidden) {
            return Err(Error::contract("parameter vector length does not match architecture"));
        }
        Ok(Denoiser {
            channels,
            hidden,
            params,
        })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn w1_range(&self) -> Range<usize> {
        0..K * K * self.channels * self.hidden
    }

    fn b1_range(&self) -> Range<usize> {
        let s = self.w1_range().end;
        s..s + self.hidden
    }

    fn emb_range(&self) -> Range<usize> {
        let s = self.b1_range().end;
        s..s + EMBED * self.hidden
    }

    fn w2_range(&self) -> Range<usize> {
        let s = self.emb_range().end;
        s..s + K * K * self.hidden * self.channels
    }

    fn b2_range(&self) -> Range<usize> {
        let s = self.w2_range().end;
        s..s + self.channels
    }

    /// Blob with dims `[channels, hidden]`.
    pub fn to_blob(&self) -> Blob {
        Blob {
            dims: vec![self.channels as u32, self.hidden as u32],
            values: self.params.iter().map(|&v| v as f32).collect(),
        }
    }

    pub fn from_blob(blob: &Blob) -> Result<Self> {
        if blob.dims.len() != 2 {
            return Err(Error::decode("blob", "denoiser blob needs dims [channels, hidden]"));
        }
        Self::from_params(
            blob.dims[0] as usize,
            blob.dims[1] as usize,
            blob.values.iter().map(|&v| v as f64).collect(),
        )
    }

    pub fn forward(&self, z: &Tensor<f64>, t: f64) -> Result<(Tensor<f64>, ForwardCache)> {
        let (c, h, w) = z.shape();
        if c != self.channels {
            return Err(Error::contract("input channels do not match the model"));
        }
        let p = &self.params;
        let phi = time_embedding(t);
        let emb = &p[self.emb_range()];
        let b1 = &p[self.b1_range()];
        let mut hidden = conv3x3(z, &p[self.w1_range()], self.hidden);
        for j in 0..self.hidden {
            let shift = b1[j] + (0..EMBED).map(|m| emb[j * EMBED + m] * phi[m]).sum::<f64>();
            for v in hidden.plane_mut(j) {
                *v = Float::tanh(*v + shift);
            }
        }
        let mut out = conv3x3(&hidden, &p[self.w2_range()], c);
        let b2 = &p[self.b2_range()];
        for (o, &bias) in b2.iter().enumerate() {
            for v in out.plane_mut(o) {
                *v += bias;
            }
        }
        debug_assert_eq!(out.shape(), (c, h, w));
        Ok((out, ForwardCache { hidden, phi }))
    }

    /// Accumulates `dL/dparams` into `grad` given `dL/dout` and the forward
    /// cache for input `z`.
    pub fn backward(&self, z: &Tensor<f64>, cache: &ForwardCache, g_out: &Tensor<f64>, grad: &mut [f64]) {
        let p = &self.params;
        let c = self.channels;
        let hd = self.hidden;
        // Output layer.
        conv3x3_weight_grad(&cache.hidden, g_out, &mut grad[self.w2_range()]);
        let b2r = self.b2_range();
        for o in 0..c {
            grad[b2r.start + o] += g_out.plane(o).iter().sum::<f64>();
        }
        // Through conv2 and tanh.
        let mut g_a1 = conv3x3_input_grad(g_out, &p[self.w2_range()], hd);
        for j in 0..hd {
            for (g, a) in g_a1.plane_mut(j).iter_mut().zip(cache.hidden.plane(j)) {
                *g *= 1.0 - a * a;
            }
        }
        conv3x3_weight_grad(z, &g_a1, &mut grad[self.w1_range()]);
        let (b1r, er) = (self.b1_range(), self.emb_range());
        for j in 0..hd {
            let s: f64 = g_a1.plane(j).iter().sum();
            grad[b1r.start + j] += s;
            for m in 0..EMBED {
                grad[er.start + j * EMBED + m] += s * cache.phi[m];
            }
        }
    }
}

/// 3x3, stride 1, zero padding 1, no bias. Weights `(out, in, 3, 3)`.
fn conv3x3(x: &Tensor<f64>, weights: &[f64], out_ch: usize) -> Tensor<f64> {
    let (cin, h, w) = x.shape();
    let mut out = Tensor::zeros((out_ch, h, w));
    for o in 0..out_ch {
        for i in 0..cin {
            let src = x.plane(i);
            let k = &weights[(o * cin + i) * 9..(o * cin + i + 1) * 9];
            let dst = out.plane_mut(o);
            for ky in 0..K {
                for kx in 0..K {
                    let wv = k[ky * K + kx];
                    for_each_tap(h, w, ky, kx, |dst_i, src_i| dst[dst_i] += wv * src[src_i]);
                }
            }
        }
    }
    out
}

/// Calls `f(out_index, in_index)` for every output pixel whose tap
/// `(ky, kx)` lands inside the `h x w` input.
#[inline]
fn for_each_tap(h: usize, w: usize, ky: usize, kx: usize, mut f: impl FnMut(usize, usize)) {
    let (y0, y1) = (1usize.saturating_sub(ky), (h + 1 - ky).min(h));
    let (x0, x1) = (1usize.saturating_sub(kx), (w + 1 - kx).min(w));
    for y in y0..y1 {
        let sy = y + ky - 1;
        for x in x0..x1 {
            f(y * w + x, sy * w + x + kx - 1);
        }
    }
}

/// `dL/dW[o, i, ky, kx] += sum_p g[o, p] * x[i, p + tap]`.
fn conv3x3_weight_grad(x: &Tensor<f64>, g: &Tensor<f64>, grad: &mut [f64]) {
    let (cin, h, w) = x.shape();
    let cout = g.channels();
    for o in 0..cout {
        let go = g.plane(o);
        for i in 0..cin {
            let src = x.plane(i);
            for ky in 0..K {
                for kx in 0..K {
                    let mut acc = 0.0;
                    for_each_tap(h, w, ky, kx, |di, si| acc += go[di] * src[si]);
                    grad[(o * cin + i) * 9 + ky * K + kx] += acc;
                }
            }
        }
    }
}

/// `dL/dx[i, q] = sum_{o, tap} W[o, i, tap] * g[o, q - tap]`.
fn conv3x3_input_grad(g: &Tensor<f64>, weights: &[f64], in_ch: usize) -> Tensor<f64> {
    let (cout, h, w) = g.shape();
    let mut out = Tensor::zeros((in_ch, h, w));
    for o in 0..cout {
        let go = g.plane(o);
        for i in 0..in_ch {
            let k = &weights[(o * in_ch + i) * 9..(o * in_ch + i + 1) * 9];
            let dst = out.plane_mut(i);
            for ky in 0..K {
                for kx in 0..K {
                    let wv = k[ky * K + kx];
                    for_each_tap(h, w, ky, kx, |di, si| dst[si] += wv * go[di]);
                }
            }
        }
    }
    out
}
