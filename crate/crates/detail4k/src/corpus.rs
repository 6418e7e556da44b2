//! Seeded synthetic image corpus with known detail ordering, plus helpers
//! for building larger test images from small photographs.

use std::path::Path;

use detail4k_core::image::ImageU8;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decode::encode_png;

pub const CORPUS_SIZE: usize = 256;

/// Names of the eight corpus images, in generation order.
pub const CORPUS_NAMES: [&str; 8] = [
    "constant",
    "gradient",
    "diagonal",
    "radial",
    "checkerboard",
    "stripes",
    "low_noise",
    "uniform_noise",
];

fn clamp_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// The eight images for `seed`: flat, three smooth fields, two periodic
/// patterns and two noise levels. Colors, phases and noise vary with the seed.
pub fn synthetic_corpus(seed: u64) -> Vec<(&'static str, ImageU8)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = CORPUS_SIZE;
    let nf = n as f64;
    let base: [f64; 3] = [
        rng.random_range(40.0..200.0),
        rng.random_range(40.0..200.0),
        rng.random_range(40.0..200.0),
    ];
    let tint: [f64; 3] = [
        rng.random_range(0.5..1.0),
        rng.random_range(0.5..1.0),
        rng.random_range(0.5..1.0),
    ];
    let period = rng.random_range(4..=12);
    let stripe = rng.random_range(2..=6);
    let (cx, cy) = (rng.random_range(0.3..0.7) * nf, rng.random_range(0.3..0.7) * nf);

    let rgb = |f: &dyn Fn(usize, usize, usize) -> f64| {
        ImageU8::from_fn(n, n, 3, |x, y, c| clamp_u8(f(x, y, c))).expect("valid dims")
    };
    let mut images = vec![
        ("constant", rgb(&|_, _, c| base[c])),
        ("gradient", rgb(&|x, _, c| 20.0 + 215.0 * tint[c] * x as f64 / nf)),
        (
            "diagonal",
            rgb(&|x, y, c| 30.0 + 200.0 * tint[c] * (x + y) as f64 / (2.0 * nf)),
        ),
        (
            "radial",
            rgb(&|x, y, c| {
                let r = ((x as f64 - cx).hypot(y as f64 - cy)) / nf;
                base[c] + 60.0 * (r * 6.0).cos()
            }),
        ),
        (
            "checkerboard",
            rgb(&|x, y, c| {
                if (x / period + y / period) % 2 == 0 {
                    30.0 * tint[c]
                } else {
                    230.0 * tint[c]
                }
            }),
        ),
        (
            "stripes",
            rgb(&|x, _, c| {
                if (x / stripe) % 2 == 0 {
                    base[c] - 40.0
                } else {
                    base[c] + 40.0
                }
            }),
        ),
    ];
    let low: Vec<f64> = (0..n * n * 3).map(|_| rng.random_range(-6.0..6.0)).collect();
    images.push(("low_noise", rgb(&|x, y, c| base[c] + low[(y * n + x) * 3 + c])));
    let uniform: Vec<u8> = (0..n * n * 3).map(|_| rng.random()).collect();
    images.push(("uniform_noise", ImageU8::new(n, n, 3, uniform).expect("valid dims")));
    images
}

/// Writes the corpus for `seed` as `<name>.png` files into `dir`.
pub fn write_corpus(dir: &Path, seed: u64) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, img) in synthetic_corpus(seed) {
        let png = encode_png(&img).map_err(std::io::Error::other)?;
        std::fs::write(dir.join(format!("{name}.png")), png)?;
    }
    Ok(())
}

/// Fills a `size x size` canvas by mirror-tiling `img`, so every pixel
/// comes from the original photograph at native scale.
pub fn mirror_tile(img: &ImageU8, size: usize) -> ImageU8 {
    let (w, h, c) = (img.width(), img.height(), img.channels());
    let fold = |v: usize, n: usize| {
        let m = v % (2 * n);
        if m < n {
            m
        } else {
            2 * n - 1 - m
        }
    };
    ImageU8::from_fn(size, size, c, |x, y, ch| img.pixel(fold(x, w), fold(y, h))[ch]).expect("valid dims")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_seeded() {
        let a = synthetic_corpus(3);
        assert_eq!(a.len(), 8);
        assert_eq!(a.iter().map(|p| p.0).collect::<Vec<_>>(), CORPUS_NAMES);
        assert_eq!(a, synthetic_corpus(3));
        assert_ne!(a, synthetic_corpus(4));
    }

    #[test]
    fn mirror_tile_reflects() {
        let img = ImageU8::from_fn(3, 2, 1, |x, y, _| (x + 10 * y) as u8).unwrap();
        let t = mirror_tile(&img, 7);
        let row0: Vec<u8> = (0..7).map(|x| t.pixel(x, 0)[0]).collect();
        assert_eq!(row0, vec![0, 1, 2, 2, 1, 0, 0]);
        let col0: Vec<u8> = (0..5).map(|y| t.pixel(0, y)[0]).collect();
        assert_eq!(col0, vec![0, 10, 10, 0, 0]);
    }
}
