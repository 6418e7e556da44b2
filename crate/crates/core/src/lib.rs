//! Fine-detail image metrics and wavelet-domain training utilities.
//!
//! Everything in this crate is a pure computation over in-memory buffers and
//! builds without `std` (only `alloc` is required). File decoding, directory
//! scanning, report emission and the command line live in the `detail4k`
//! companion crate.
//!
//! Module map:
//!
//! * [`image`] - 8-bit rasters, grayscale conversion, gray-level quantization, patch grids.
//! * [`jpeg`] - deterministic baseline JPEG encoder plus a decoder for its own streams.
//! * [`detail`] - GLCM Score and Compression Ratio.
//! * [`wavelet`] - orthonormal Haar DWT/IDWT and the band-weighted wavelet loss.
//! * [`conv`] - reference 2D convolution, dilation duality and tiled upsample-convolution.
//! * [`flow`] - rectified-flow / noise-prediction toy trainer with hand-written backprop.
//! * [`quality`] - PSNR, NMSE and SSIM between two rasters.
//! * [`stats`] - SRCC / PLCC and dataset dimension statistics.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod blob;
pub mod conv;
pub mod detail;
mod error;
pub mod flow;
pub mod image;
pub mod jpeg;
pub mod quality;
pub mod stats;
pub mod tensor;
pub mod wavelet;

pub use error::{Error, Result};
pub use tensor::{Tensor, TensorF};
