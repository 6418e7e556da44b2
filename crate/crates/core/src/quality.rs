//! Full-reference fidelity measures between two 8-bit rasters.

use num_traits::Float;

use crate::image::{to_grayscale, ImageU8};
use crate::{Error, Result};

fn check_same(a: &ImageU8, b: &ImageU8) -> Result<()> {
    if (a.width(), a.height(), a.channels()) != (b.width(), b.height(), b.channels()) {
        return Err(Error::contract("images differ in size or channel count"));
    }
    Ok(())
}

fn sse(a: &ImageU8, b: &ImageU8) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum()
}

/// `10 log10(255^2 / MSE)` over all samples; `+inf` for identical images.
pub fn psnr(reference: &ImageU8, test: &ImageU8) -> Result<f64> {
    check_same(reference, test)?;
    let mse = sse(reference, test) / reference.data().len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * Float::log10(255.0 * 255.0 / mse))
}

/// `||ref - test||^2 / ||ref||^2`.
pub fn nmse(reference: &ImageU8, test: &ImageU8) -> Result<f64> {
    check_same(reference, test)?;
    let energy: f64 = reference.data().iter().map(|&v| (v as f64) * (v as f64)).sum();
    if energy == 0.0 {
        return Err(Error::contract("reference image is all zeros"));
    }
    Ok(sse(reference, test) / energy)
}

const SSIM_WINDOW: usize = 7;

/// Mean SSIM of the grayscale images over all 7x7 windows (uniform
/// weights, `K1 = 0.01`, `K2 = 0.03`, sample covariance).
pub fn ssim(reference: &ImageU8, test: &ImageU8) -> Result<f64> {
    check_same(reference, test)?;
    let (w, h) = (reference.width(), reference.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::contract("SSIM needs images of at least 7x7"));
    }
    let a = to_grayscale(reference);
    let b = to_grayscale(test);
    let (a, b) = (a.data(), b.data());
    let c1 = (0.01f64 * 255.0) * (0.01 * 255.0);
    let c2 = (0.03f64 * 255.0) * (0.03 * 255.0);
    let n = (SSIM_WINDOW * SSIM_WINDOW) as f64;
    let cov_norm = n / (n - 1.0);
    let mut total = 0.0;
    let mut windows = 0usize;
    for y0 in 0..=h - SSIM_WINDOW {
        for x0 in 0..=w - SSIM_WINDOW {
            let (mut sa, mut sb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for y in y0..y0 + SSIM_WINDOW {
                for x in x0..x0 + SSIM_WINDOW {
                    let (p, q) = (a[y * w + x] as f64, b[y * w + x] as f64);
                    sa += p;
                    sb += q;
                    saa += p * p;
                    sbb += q * q;
                    sab += p * q;
                }
            }
            let (ma, mb) = (sa / n, sb / n);
            let va = cov_norm * (saa / n - ma * ma);
            let vb = cov_norm * (sbb / n - mb * mb);
            let cab = cov_norm * (sab / n - ma * mb);
            total += ((2.0 * ma * mb + c1) * (2.0 * cab + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            windows += 1;
        }
    }
    Ok(total / windows as f64)
}
