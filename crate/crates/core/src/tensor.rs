//! Dense `(channels, height, width)` tensors.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_traits::Float;

use crate::{Error, Result};

/// Row-major `(C, H, W)` tensor. Values are finite on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T = f64> {
    shape: (usize, usize, usize),
    data: Vec<T>,
}

/// Single-precision storage, as used by the convolution engine.
pub type TensorF = Tensor<f32>;

impl<T: Float> Tensor<T> {
    pub fn new(shape: (usize, usize, usize), data: Vec<T>) -> Result<Self> {
        let (c, h, w) = shape;
        if data.len() != c * h * w {
            return Err(Error::contract(alloc::format!(
                "tensor data length {} does not match shape {c}x{h}x{w}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("tensor contains a non-finite value"));
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: (usize, usize, usize)) -> Self {
        Tensor {
            shape,
            data: vec![T::zero(); shape.0 * shape.1 * shape.2],
        }
    }

    pub fn from_fn(shape: (usize, usize, usize), mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let (c, h, w) = shape;
        let mut data = Vec::with_capacity(c * h * w);
        for ci in 0..c {
            for y in 0..h {
                for x in 0..w {
                    data.push(f(ci, y, x));
                }
            }
        }
        Tensor { shape, data }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.shape
    }

    pub fn channels(&self) -> usize {
        self.shape.0
    }

    pub fn height(&self) -> usize {
        self.shape.1
    }

    pub fn width(&self) -> usize {
        self.shape.2
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn plane(&self, c: usize) -> &[T] {
        let n = self.shape.1 * self.shape.2;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [T] {
        let n = self.shape.1 * self.shape.2;
        &mut self.data[c * n..(c + 1) * n]
    }

    /// Sum of squares, accumulated in `f64`.
    pub fn norm_sq(&self) -> f64 {
        self.data
            .iter()
            .map(|v| {
                let v = v.to_f64().unwrap_or(f64::NAN);
                v * v
            })
            .sum()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Tensor {
            shape: self.shape,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::contract(alloc::format!(
                "shape mismatch: {:?} vs {:?}",
                self.shape,
                other.shape
            )));
        }
        Ok(Tensor {
            shape: self.shape,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Largest absolute elementwise difference, in `f64`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.shape != other.shape {
            return Err(Error::contract("shape mismatch in max_abs_diff"));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).abs().to_f64().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Nearest-neighbor upsampling by an integer factor along both spatial axes.
    pub fn upsample_nearest(&self, factor: usize) -> Self {
        let (c, h, w) = self.shape;
        Tensor::from_fn((c, h * factor, w * factor), |ci, y, x| {
            self[(ci, y / factor, x / factor)]
        })
    }

    /// Convert element type (e.g. `f32` storage to `f64`).
    pub fn cast<U: Float>(&self) -> Tensor<U> {
        Tensor {
            shape: self.shape,
            data: self.data.iter().map(|v| U::from(*v).unwrap_or_else(U::nan)).collect(),
        }
    }
}

impl<T> Index<(usize, usize, usize)> for Tensor<T> {
    type Output = T;

    fn index(&self, (c, y, x): (usize, usize, usize)) -> &T {
        &self.data[(c * self.shape.1 + y) * self.shape.2 + x]
    }
}

impl<T> IndexMut<(usize, usize, usize)> for Tensor<T> {
    fn index_mut(&mut self, (c, y, x): (usize, usize, usize)) -> &mut T {
        &mut self.data[(c * self.shape.1 + y) * self.shape.2 + x]
    }
}
