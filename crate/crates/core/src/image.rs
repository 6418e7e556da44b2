//! 8-bit rasters and the preprocessing shared by the detail metrics.

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Decoded 8-bit raster, row-major with interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageU8 {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl ImageU8 {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::contract("image dimensions must be at least 1x1"));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::contract(format!(
                "unsupported channel count {channels} (expected 1 or 3)"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::contract(format!(
                "image data length {} does not match {width}x{height}x{channels}",
                data.len()
            )));
        }
        Ok(ImageU8 {
            width,
            height,
            channels,
            data,
        })
    }

    /// Image where every pixel holds `pixel` (length must equal `channels`).
    pub fn filled(width: usize, height: usize, pixel: &[u8]) -> Result<Self> {
        let data = pixel
            .iter()
            .copied()
            .cycle()
            .take(width * height * pixel.len())
            .collect();
        ImageU8::new(width, height, pixel.len(), data)
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> u8,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c));
                }
            }
        }
        ImageU8::new(width, height, channels, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    /// Three-channel copy; grayscale samples are replicated into R, G and B.
    pub fn to_rgb(&self) -> ImageU8 {
        if self.channels == 3 {
            return self.clone();
        }
        let data = self.data.iter().flat_map(|&v| [v, v, v]).collect();
        ImageU8 {
            width: self.width,
            height: self.height,
            channels: 3,
            data,
        }
    }
}

/// BT.601 luma with round-half-up, computed in exact integer arithmetic.
#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8
}

/// Single-channel BT.601 conversion. One-channel input is returned unchanged.
pub fn to_grayscale(img: &ImageU8) -> ImageU8 {
    if img.channels == 1 {
        return img.clone();
    }
    let data = img.data.chunks_exact(3).map(|p| luma(p[0], p[1], p[2])).collect();
    ImageU8 {
        width: img.width,
        height: img.height,
        channels: 1,
        data,
    }
}

/// Gray image whose samples are bin indices in `0..levels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayQuantized {
    width: usize,
    height: usize,
    levels: usize,
    data: Vec<u8>,
}

impl GrayQuantized {
    /// Builds from raw level indices; every index must be below `levels`.
    pub fn from_indices(width: usize, height: usize, levels: usize, data: Vec<u8>) -> Result<Self> {
        if !(2..=256).contains(&levels) {
            return Err(Error::contract(format!("levels {levels} outside 2..=256")));
        }
        if data.len() != width * height {
            return Err(Error::contract("quantized data length does not match dimensions"));
        }
        if let Some(bad) = data.iter().find(|&&v| v as usize >= levels) {
            return Err(Error::contract(format!("level index {bad} >= {levels}")));
        }
        Ok(GrayQuantized {
            width,
            height,
            levels,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn full_view(&self) -> PatchView<'_> {
        self.view(Rect {
            x: 0,
            y: 0,
            width: self.width,
            height: self.height,
        })
    }

    /// Borrowed sub-rectangle. Panics if `rect` leaves the image.
    pub fn view(&self, rect: Rect) -> PatchView<'_> {
        assert!(
            rect.x + rect.width <= self.width && rect.y + rect.height <= self.height,
            "patch {rect:?} outside {}x{} image",
            self.width,
            self.height
        );
        PatchView {
            data: &self.data,
            stride: self.width,
            rect,
            levels: self.levels,
        }
    }
}

/// Uniform floor binning: `index = sample * levels / 256`.
pub fn quantize(img: &ImageU8, levels: usize) -> Result<GrayQuantized> {
    if img.channels != 1 {
        return Err(Error::contract("quantize expects a single-channel image"));
    }
    if !(2..=256).contains(&levels) {
        return Err(Error::contract(format!("levels {levels} outside 2..=256")));
    }
    let data = img.data.iter().map(|&v| (v as usize * levels / 256) as u8).collect();
    Ok(GrayQuantized {
        width: img.width,
        height: img.height,
        levels,
        data,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

/// Read-only window into a [`GrayQuantized`] image.
#[derive(Debug, Clone, Copy)]
pub struct PatchView<'a> {
    data: &'a [u8],
    stride: usize,
    rect: Rect,
    levels: usize,
}

impl<'a> PatchView<'a> {
    pub fn width(&self) -> usize {
        self.rect.width
    }

    pub fn height(&self) -> usize {
        self.rect.height
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Row `y` of the patch (patch-local coordinates).
    #[inline]
    pub fn row(&self, y: usize) -> &'a [u8] {
        let start = (self.rect.y + y) * self.stride + self.rect.x;
        &self.data[start..start + self.rect.width]
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.row(y)[x]
    }
}

/// Non-overlapping square patches anchored at the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchGrid {
    pub patch_size: usize,
    pub rows: usize,
    pub cols: usize,
}

impl PatchGrid {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rect(&self, row: usize, col: usize) -> Rect {
        Rect {
            x: col * self.patch_size,
            y: row * self.patch_size,
            width: self.patch_size,
            height: self.patch_size,
        }
    }

    /// Patches in row-major order.
    pub fn rects(&self) -> impl Iterator<Item = Rect> + '_ {
        (0..self.rows).flat_map(move |r| (0..self.cols).map(move |c| self.rect(r, c)))
    }
}

/// Partial edge patches are dropped.
pub fn partition_patches(width: usize, height: usize, patch_size: usize) -> Result<PatchGrid> {
    if patch_size == 0 {
        return Err(Error::contract("patch size must be at least 1"));
    }
    let grid = PatchGrid {
        patch_size,
        rows: height / patch_size,
        cols: width / patch_size,
    };
    if grid.is_empty() {
        return Err(Error::EmptyGrid {
            width,
            height,
            patch: patch_size,
        });
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn luma_examples() {
        assert_eq!(luma(255, 255, 255), 255);
        assert_eq!(luma(255, 0, 0), 76);
        assert_eq!(luma(0, 0, 0), 0);
        assert_eq!(luma(0, 255, 0), 150); // 149.685
        assert_eq!(luma(0, 0, 255), 29); // 29.07
    }

    #[test]
    fn grayscale_identity_on_single_channel() {
        let img = ImageU8::new(2, 1, 1, vec![3, 200]).unwrap();
        assert_eq!(to_grayscale(&img), img);
    }

    #[test]
    fn quantize_examples() {
        let img = ImageU8::new(4, 1, 1, vec![0, 255, 4, 3]).unwrap();
        let q = quantize(&img, 64).unwrap();
        assert_eq!(q.data(), &[0, 63, 1, 0]);
    }

    #[test]
    fn quantize_rejects_rgb() {
        let img = ImageU8::filled(2, 2, &[1, 2, 3]).unwrap();
        assert!(matches!(quantize(&img, 64), Err(Error::Contract(_))));
    }

    #[test]
    fn quantize_is_surjective_over_all_samples() {
        let img = ImageU8::new(256, 1, 1, (0..=255).collect()).unwrap();
        let q = quantize(&img, 64).unwrap();
        let mut seen = [false; 64];
        for &v in q.data() {
            seen[v as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn patch_grid_examples() {
        let g = partition_patches(128, 128, 64).unwrap();
        assert_eq!((g.rows, g.cols), (2, 2));
        // 130 tall, 190 wide
        let g = partition_patches(190, 130, 64).unwrap();
        assert_eq!((g.rows, g.cols), (2, 2));
        assert!(matches!(partition_patches(63, 63, 64), Err(Error::EmptyGrid { .. })));
    }

    #[test]
    fn image_invariants_enforced() {
        assert!(ImageU8::new(0, 1, 1, vec![]).is_err());
        assert!(ImageU8::new(1, 1, 2, vec![0, 0]).is_err());
        assert!(ImageU8::new(2, 2, 3, vec![0; 11]).is_err());
    }
}
