//! Single-level orthonormal 2D Haar transform and the band-weighted
//! wavelet loss.
//!
//! With the orthonormal filters `L = [1, 1]/sqrt(2)` and `H = [-1, 1]/sqrt(2)`
//! the transform preserves squared norm, so the loss with unit band weights
//! equals the plain squared error of the residual. Non-unit [`BandWeights`]
//! are the only way the wavelet loss differs from plain MSE; its gradient at
//! unit weights is identical to the plain rectified-flow gradient.

use num_traits::Float;

use crate::tensor::Tensor;
use crate::{Error, Result};

/// The four 2x2 analysis kernels `LL^T, LH^T, HL^T, HH^T`.
///
/// `kernel[i][j]` multiplies the input sample at row offset `i`, column
/// offset `j` of each non-overlapping 2x2 block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaarKernels<T> {
    pub ll: [[T; 2]; 2],
    pub lh: [[T; 2]; 2],
    pub hl: [[T; 2]; 2],
    pub hh: [[T; 2]; 2],
}

impl<T: Float> HaarKernels<T> {
    pub fn new() -> Self {
        let s = T::one() / (T::one() + T::one()).sqrt();
        let low = [s, s];
        let high = [-s, s];
        let outer = |a: [T; 2], b: [T; 2]| [[a[0] * b[0], a[0] * b[1]], [a[1] * b[0], a[1] * b[1]]];
        let k = HaarKernels {
            ll: outer(low, low),
            lh: outer(low, high),
            hl: outer(high, low),
            hh: outer(high, high),
        };
        debug_assert!(k.orthonormality_error() < T::from(1e-6).unwrap());
        k
    }

    fn all(&self) -> [[[T; 2]; 2]; 4] {
        [self.ll, self.lh, self.hl, self.hh]
    }

    /// Max deviation of the 4x4 flattened-kernel Gram matrix from identity.
    pub fn orthonormality_error(&self) -> T {
        let flat = self.all().map(|k| [k[0][0], k[0][1], k[1][0], k[1][1]]);
        let mut worst = T::zero();
        for a in 0..4 {
            for b in 0..4 {
                let dot = (0..4).fold(T::zero(), |acc, i| acc + flat[a][i] * flat[b][i]);
                let target = if a == b { T::one() } else { T::zero() };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

impl<T: Float> Default for HaarKernels<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Quarter-resolution sub-bands of one tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SubBands<T = f64> {
    pub ll: Tensor<T>,
    pub lh: Tensor<T>,
    pub hl: Tensor<T>,
    pub hh: Tensor<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Band {
    Ll,
    Lh,
    Hl,
    Hh,
}

impl Band {
    pub const ALL: [Band; 4] = [Band::Ll, Band::Lh, Band::Hl, Band::Hh];

    pub fn name(self) -> &'static str {
        match self {
            Band::Ll => "ll",
            Band::Lh => "lh",
            Band::Hl => "hl",
            Band::Hh => "hh",
        }
    }
}

impl<T: Float> SubBands<T> {
    pub fn band(&self, b: Band) -> &Tensor<T> {
        match b {
            Band::Ll => &self.ll,
            Band::Lh => &self.lh,
            Band::Hl => &self.hl,
            Band::Hh => &self.hh,
        }
    }

    pub fn band_mut(&mut self, b: Band) -> &mut Tensor<T> {
        match b {
            Band::Ll => &mut self.ll,
            Band::Lh => &mut self.lh,
            Band::Hl => &mut self.hl,
            Band::Hh => &mut self.hh,
        }
    }

    pub fn zeros(shape: (usize, usize, usize)) -> Self {
        SubBands {
            ll: Tensor::zeros(shape),
            lh: Tensor::zeros(shape),
            hl: Tensor::zeros(shape),
            hh: Tensor::zeros(shape),
        }
    }

    /// Squared norm of each band in `[ll, lh, hl, hh]` order.
    pub fn energies(&self) -> [f64; 4] {
        Band::ALL.map(|b| self.band(b).norm_sq())
    }
}

/// Forward Haar transform. Height and width must be even.
pub fn dwt_haar<T: Float>(x: &Tensor<T>) -> Result<SubBands<T>> {
    let (c, h, w) = x.shape();
    if h % 2 != 0 || w % 2 != 0 {
        return Err(Error::contract(alloc::format!(
            "Haar DWT needs even spatial dims, got {h}x{w}"
        )));
    }
    let k = HaarKernels::<T>::new();
    let kernels = k.all();
    let half = (c, h / 2, w / 2);
    let mut out = SubBands::zeros(half);
    for ci in 0..c {
        let plane = x.plane(ci);
        for i in 0..h / 2 {
            let r0 = &plane[(2 * i) * w..(2 * i + 1) * w];
            let r1 = &plane[(2 * i + 1) * w..(2 * i + 2) * w];
            for j in 0..w / 2 {
                let block = [[r0[2 * j], r0[2 * j + 1]], [r1[2 * j], r1[2 * j + 1]]];
                for (band, kern) in Band::ALL.iter().zip(kernels.iter()) {
                    let v = block[0][0] * kern[0][0]
                        + block[0][1] * kern[0][1]
                        + block[1][0] * kern[1][0]
                        + block[1][1] * kern[1][1];
                    out.band_mut(*band)[(ci, i, j)] = v;
                }
            }
        }
    }
    Ok(out)
}

/// Inverse Haar transform (the transpose of [`dwt_haar`]).
pub fn idwt_haar<T: Float>(b: &SubBands<T>) -> Result<Tensor<T>> {
    let shape = b.ll.shape();
    if Band::ALL.iter().any(|&band| b.band(band).shape() != shape) {
        return Err(Error::contract("sub-bands must share one shape"));
    }
    let (c, h2, w2) = shape;
    let kernels = HaarKernels::<T>::new().all();
    let mut out = Tensor::zeros((c, 2 * h2, 2 * w2));
    for ci in 0..c {
        for i in 0..h2 {
            for j in 0..w2 {
                let coeffs = Band::ALL.map(|band| b.band(band)[(ci, i, j)]);
                for di in 0..2 {
                    for dj in 0..2 {
                        let v = coeffs
                            .iter()
                            .zip(kernels.iter())
                            .fold(T::zero(), |acc, (&cf, k)| acc + cf * k[di][dj]);
                        out[(ci, 2 * i + di, 2 * j + dj)] = v;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Per-band loss multipliers.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BandWeights {
    pub ll: f64,
    pub lh: f64,
    pub hl: f64,
    pub hh: f64,
}

impl BandWeights {
    pub const UNIT: BandWeights = BandWeights {
        ll: 1.0,
        lh: 1.0,
        hl: 1.0,
        hh: 1.0,
    };

    /// High-frequency emphasis: detail bands weighted 2, approximation 1.
    pub const EMPHASIS: BandWeights = BandWeights {
        ll: 1.0,
        lh: 2.0,
        hl: 2.0,
        hh: 2.0,
    };

    pub fn new(ll: f64, lh: f64, hl: f64, hh: f64) -> Result<Self> {
        let w = BandWeights { ll, lh, hl, hh };
        let all = w.as_array();
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::contract("band weights must be finite and non-negative"));
        }
        if all.iter().all(|&v| v == 0.0) {
            return Err(Error::contract("at least one band weight must be positive"));
        }
        Ok(w)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.ll, self.lh, self.hl, self.hh]
    }

    pub fn get(&self, b: Band) -> f64 {
        match b {
            Band::Ll => self.ll,
            Band::Lh => self.lh,
            Band::Hl => self.hl,
            Band::Hh => self.hh,
        }
    }

    pub fn is_unit(&self) -> bool {
        *self == Self::UNIT
    }
}

impl Default for BandWeights {
    fn default() -> Self {
        Self::UNIT
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Reduction {
    /// Sum of squared differences.
    #[default]
    Sum,
    /// Sum divided by the element count.
    Mean,
}

/// `w_t * sum_b weight_b * ||dwt(pred)_b - dwt(target)_b||^2`, in `f64`.
///
/// The transform is linear, so the residual is transformed once.
pub fn wlf_loss<T: Float>(
    pred: &Tensor<T>,
    target: &Tensor<T>,
    weights: &BandWeights,
    w_t: f64,
    reduction: Reduction,
) -> Result<f64> {
    if w_t.is_nan() || w_t < 0.0 {
        return Err(Error::contract("loss weight w_t must be non-negative"));
    }
    let residual = pred.sub(target)?;
    let bands = dwt_haar(&residual)?;
    let energies = bands.energies();
    let weighted: f64 = energies.iter().zip(weights.as_array()).map(|(e, w)| e * w).sum();
    let loss = w_t * weighted;
    Ok(match reduction {
        Reduction::Sum => loss,
        Reduction::Mean => loss / pred.len() as f64,
    })
}
