use alloc::vec::Vec;

use rand::Rng;

use crate::tensor::Tensor;
use crate::{Error, Result};

/// Random textures: a linear ramp, a checkerboard of period 1, 2 or 4 and
/// 3x3 box-blurred noise per channel, summed and clamped to `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticDataset {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl SyntheticDataset {
    pub fn new(channels: usize, height: usize, width: usize) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 || !height.is_multiple_of(2) || !width.is_multiple_of(2) {
            return Err(Error::contract(
                "dataset needs >= 1 channel and even, non-zero spatial dims",
            ));
        }
        Ok(SyntheticDataset {
            channels,
            height,
            width,
        })
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Tensor<f64> {
        let (c, h, w) = self.shape();
        let mut out = Tensor::zeros((c, h, w));
        for ch in 0..c {
            let gx = rng.random_range(-0.5..0.5);
            let gy = rng.random_range(-0.5..0.5);
            let offset = rng.random_range(-0.2..0.2);
            let period = [1usize, 2, 4][rng.random_range(0..3)];
            let check = rng.random_range(0.0..0.4);
            let noise_amp = rng.random_range(0.0..0.4);
            let noise: Vec<f64> = (0..h * w).map(|_| rng.random_range(-1.0..1.0)).collect();
            let plane = out.plane_mut(ch);
            for y in 0..h {
                for x in 0..w {
                    let ramp = offset + gx * (x as f64 / w as f64 - 0.5) + gy * (y as f64 / h as f64 - 0.5);
                    let sign = if (x / period + y / period).is_multiple_of(2) {
                        1.0
                    } else {
                        -1.0
                    };
                    let (mut sum, mut n) = (0.0, 0.0);
                    for yy in y.saturating_sub(1)..(y + 2).min(h) {
                        for xx in x.saturating_sub(1)..(x + 2).min(w) {
                            sum += noise[yy * w + xx];
                            n += 1.0;
                        }
                    }
                    let v = ramp + check * sign + noise_amp * sum / n;
                    plane[y * w + x] = v.clamp(-1.0, 1.0);
                }
            }
        }
        out
    }
}
