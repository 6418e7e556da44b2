//! GLCM Score and Compression Ratio.
//!
//! The GLCM Score averages co-occurrence entropies over 64x64 patches of the
//! 64-level gray image: `s = -(1/P) * sum_p H(g_p)`. Since that value is
//! never positive, [`DetailScores`] also carries `exp(s)`, which lies in
//! `(0, 1]` and is the form to compare against published positive scores.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::image::{partition_patches, quantize, to_grayscale, ImageU8, PatchView};
use crate::jpeg::{encode_baseline, EncoderConfig};
use crate::{Error, Result};

/// Pixel displacement for one (radius, orientation) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GlcmOffset {
    radius: usize,
    angle: Orientation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Orientation {
    Deg0,
    Deg45,
    Deg90,
    Deg135,
}

impl Orientation {
    pub const ALL: [Orientation; 4] = [
        Orientation::Deg0,
        Orientation::Deg45,
        Orientation::Deg90,
        Orientation::Deg135,
    ];

    pub fn from_degrees(deg: u32) -> Option<Self> {
        match deg {
            0 => Some(Orientation::Deg0),
            45 => Some(Orientation::Deg45),
            90 => Some(Orientation::Deg90),
            135 => Some(Orientation::Deg135),
            _ => None,
        }
    }
}

impl GlcmOffset {
    pub fn new(radius: usize, angle: Orientation) -> Result<Self> {
        if radius == 0 {
            return Err(Error::contract("GLCM radius must be >= 1"));
        }
        Ok(GlcmOffset { radius, angle })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn orientation(&self) -> Orientation {
        self.angle
    }

    /// `(dy, dx)`; rows grow downward, so 45 degrees points up and right.
    pub fn displacement(&self) -> (isize, isize) {
        let d = self.radius as isize;
        match self.angle {
            Orientation::Deg0 => (0, d),
            Orientation::Deg45 => (-d, d),
            Orientation::Deg90 => (-d, 0),
            Orientation::Deg135 => (-d, -d),
        }
    }

    /// Number of in-bounds directed pairs in a `w x h` patch.
    pub fn pair_count(&self, width: usize, height: usize) -> usize {
        let (dy, dx) = self.displacement();
        let (ay, ax) = (dy.unsigned_abs(), dx.unsigned_abs());
        width.saturating_sub(ax) * height.saturating_sub(ay)
    }
}

/// The 16 default offsets: radii 1..=4 crossed with the four orientations.
pub fn default_offsets() -> Vec<GlcmOffset> {
    let mut v = Vec::with_capacity(16);
    for radius in 1..=4 {
        for angle in Orientation::ALL {
            v.push(GlcmOffset { radius, angle });
        }
    }
    v
}

/// `levels x levels` co-occurrence counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlcmMatrix {
    levels: usize,
    counts: Vec<u32>,
}

impl GlcmMatrix {
    pub fn zeros(levels: usize) -> Self {
        GlcmMatrix {
            levels,
            counts: vec![0; levels * levels],
        }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    #[inline]
    pub fn count(&self, i: usize, j: usize) -> u32 {
        self.counts[i * self.levels + j]
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    /// `p(i, j) = count / total`; all zeros for an empty matrix.
    pub fn probability(&self, i: usize, j: usize) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.count(i, j) as f64 / total as f64
        }
    }

    pub fn clear(&mut self) {
        self.counts.iter_mut().for_each(|c| *c = 0);
    }

    /// Elementwise sum with another matrix of the same size.
    pub fn accumulate(&mut self, other: &GlcmMatrix) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += *b;
        }
    }
}

/// Adds the directed pairs of `patch` at `offset` into `counts`.
fn add_pairs(patch: &PatchView<'_>, offset: GlcmOffset, symmetric: bool, counts: &mut [u32], levels: usize) {
    let (dy, dx) = offset.displacement();
    let (w, h) = (patch.width() as isize, patch.height() as isize);
    let y_range = (0.max(-dy))..(h.min(h - dy));
    let x_range = (0.max(-dx))..(w.min(w - dx));
    if x_range.is_empty() {
        return;
    }
    for y in y_range {
        let a_row = &patch.row(y as usize)[x_range.start as usize..x_range.end as usize];
        let b_start = (x_range.start + dx) as usize;
        let b_row = &patch.row((y + dy) as usize)[b_start..b_start + a_row.len()];
        for (&a, &b) in a_row.iter().zip(b_row) {
            counts[a as usize * levels + b as usize] += 1;
            if symmetric {
                counts[b as usize * levels + a as usize] += 1;
            }
        }
    }
}

fn check_patch_fits(patch: &PatchView<'_>, offset: GlcmOffset) -> Result<()> {
    let (dy, dx) = offset.displacement();
    if patch.height() <= dy.unsigned_abs() || patch.width() <= dx.unsigned_abs() {
        return Err(Error::contract(format!(
            "{}x{} patch too small for offset ({dy}, {dx})",
            patch.width(),
            patch.height()
        )));
    }
    Ok(())
}

/// Co-occurrence counts of `(a at (y, x), b at (y + dy, x + dx))` over all
/// in-bounds pairs; symmetric mode also counts `(b, a)`.
pub fn compute_glcm(patch: &PatchView<'_>, offset: GlcmOffset, symmetric: bool) -> Result<GlcmMatrix> {
    check_patch_fits(patch, offset)?;
    let mut m = GlcmMatrix::zeros(patch.levels());
    add_pairs(patch, offset, symmetric, &mut m.counts, patch.levels());
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

/// `-sum p ln p` over non-empty cells, divided by `ln 2` for base 2.
pub fn glcm_entropy(m: &GlcmMatrix, base: LogBase) -> Result<f64> {
    let total = m.total();
    if total == 0 {
        return Err(Error::EmptyMatrix);
    }
    let n = total as f64;
    let mut acc = 0.0f64;
    for &c in &m.counts {
        if c > 0 {
            let p = c as f64 / n;
            acc += p * Float::ln(p);
        }
    }
    Ok(convert_base(-acc, base))
}

fn convert_base(h: f64, base: LogBase) -> f64 {
    match base {
        LogBase::Natural => h,
        LogBase::Two => h / core::f64::consts::LN_2,
    }
}

/// How per-offset co-occurrences become one patch entropy `H(g_p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PoolMode {
    /// One entropy per offset, averaged.
    #[default]
    PerOffset,
    /// Counts of all offsets summed into one matrix, one entropy.
    Accumulated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlcmConfig {
    pub levels: usize,
    pub patch_size: usize,
    pub offsets: Vec<GlcmOffset>,
    pub symmetric: bool,
    pub log_base: LogBase,
    pub pool: PoolMode,
}

impl Default for GlcmConfig {
    fn default() -> Self {
        GlcmConfig {
            levels: 64,
            patch_size: 64,
            offsets: default_offsets(),
            symmetric: false,
            log_base: LogBase::Natural,
            pool: PoolMode::PerOffset,
        }
    }
}

impl GlcmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=256).contains(&self.levels) {
            return Err(Error::contract("levels must be in 2..=256"));
        }
        if self.offsets.is_empty() {
            return Err(Error::contract("at least one GLCM offset is required"));
        }
        let max_radius = self.offsets.iter().map(|o| o.radius).max().unwrap_or(0);
        if self.patch_size < max_radius + 1 {
            return Err(Error::contract(format!(
                "patch size {} must exceed the largest radius {max_radius}",
                self.patch_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DetailScores {
    /// `-(1/P) sum_p H(g_p)`; never positive.
    pub glcm_raw: f64,
    /// `exp(glcm_raw)`, in `(0, 1]`.
    pub glcm_normalized: f64,
    pub compression_ratio: f64,
    pub patch_count: usize,
}

/// GLCM part of the detail scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlcmScore {
    pub raw: f64,
    pub normalized: f64,
    pub patch_count: usize,
}

/// `p ln p` for every possible count of a matrix with a fixed total. The
/// values are computed exactly as [`glcm_entropy`] computes them, so both
/// paths agree bit-for-bit.
struct EntropyTable {
    total: u64,
    plogp: Vec<f64>,
}

impl EntropyTable {
    fn new(total: u64) -> Self {
        let n = total as f64;
        let plogp = (0..=total)
            .map(|c| {
                if c == 0 {
                    0.0
                } else {
                    let p = c as f64 / n;
                    p * Float::ln(p)
                }
            })
            .collect();
        EntropyTable { total, plogp }
    }

    fn entropy(&self, counts: &[u32]) -> f64 {
        let mut acc = 0.0f64;
        for &c in counts {
            if c > 0 {
                acc += self.plogp[c as usize];
            }
        }
        -acc
    }
}

/// Scores an image (RGB is converted to BT.601 gray first).
pub fn glcm_score(img: &ImageU8, cfg: &GlcmConfig) -> Result<GlcmScore> {
    cfg.validate()?;
    let gray = to_grayscale(img);
    let q = quantize(&gray, cfg.levels)?;
    let grid = partition_patches(q.width(), q.height(), cfg.patch_size)?;

    let levels = cfg.levels;
    let pair_multiplier = if cfg.symmetric { 2 } else { 1 };
    let per_offset_totals: Vec<u64> = cfg
        .offsets
        .iter()
        .map(|o| (o.pair_count(cfg.patch_size, cfg.patch_size) * pair_multiplier) as u64)
        .collect();
    let mut tables: Vec<EntropyTable> = Vec::new();
    let table_index = |total: u64, tables: &mut Vec<EntropyTable>| -> usize {
        match tables.iter().position(|t| t.total == total) {
            Some(i) => i,
            None => {
                tables.push(EntropyTable::new(total));
                tables.len() - 1
            }
        }
    };
    let offset_tables: Vec<usize> = per_offset_totals.iter().map(|&t| table_index(t, &mut tables)).collect();
    let pooled_table = table_index(per_offset_totals.iter().sum(), &mut tables);

    let mut counts = vec![0u32; levels * levels];
    let mut entropy_sum = 0.0f64;
    for rect in grid.rects() {
        let patch = q.view(rect);
        let h_patch = match cfg.pool {
            PoolMode::PerOffset => {
                let mut acc = 0.0;
                for (offset, &ti) in cfg.offsets.iter().zip(&offset_tables) {
                    counts.iter_mut().for_each(|c| *c = 0);
                    add_pairs(&patch, *offset, cfg.symmetric, &mut counts, levels);
                    acc += tables[ti].entropy(&counts);
                }
                acc / cfg.offsets.len() as f64
            }
            PoolMode::Accumulated => {
                counts.iter_mut().for_each(|c| *c = 0);
                for offset in &cfg.offsets {
                    add_pairs(&patch, *offset, cfg.symmetric, &mut counts, levels);
                }
                tables[pooled_table].entropy(&counts)
            }
        };
        entropy_sum += h_patch;
    }
    let raw = -convert_base(entropy_sum / grid.len() as f64, cfg.log_base);
    let raw = if raw == 0.0 { 0.0 } else { raw };
    Ok(GlcmScore {
        raw,
        normalized: Float::exp(raw),
        patch_count: grid.len(),
    })
}

/// Raw RGB byte size over baseline JPEG size. Grayscale input counts as
/// three bytes per pixel and is expanded before encoding.
pub fn compression_ratio(img: &ImageU8, cfg: &EncoderConfig) -> Result<f64> {
    let rgb = img.to_rgb();
    let encoded = encode_baseline(&rgb, cfg)?;
    Ok((rgb.width() * rgb.height() * 3) as f64 / encoded.len() as f64)
}

/// Both fine-detail indicators for one image.
pub fn detail_scores(img: &ImageU8, glcm: &GlcmConfig, jpeg: &EncoderConfig) -> Result<DetailScores> {
    let g = glcm_score(img, glcm)?;
    Ok(DetailScores {
        glcm_raw: g.raw,
        glcm_normalized: g.normalized,
        compression_ratio: compression_ratio(img, jpeg)?,
        patch_count: g.patch_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::GrayQuantized;

    fn stripes(width: usize, height: usize) -> GrayQuantized {
        let data = (0..height).flat_map(|_| (0..width).map(|x| (x % 2) as u8)).collect();
        GrayQuantized::from_indices(width, height, 64, data).unwrap()
    }

    #[test]
    fn displacements() {
        let d = |r, a| GlcmOffset::new(r, a).unwrap().displacement();
        assert_eq!(d(1, Orientation::Deg0), (0, 1));
        assert_eq!(d(2, Orientation::Deg45), (-2, 2));
        assert_eq!(d(3, Orientation::Deg90), (-3, 0));
        assert_eq!(d(4, Orientation::Deg135), (-4, -4));
        assert_eq!(default_offsets().len(), 16);
    }

    #[test]
    fn constant_patch_is_point_mass() {
        let q = GrayQuantized::from_indices(8, 8, 64, vec![7; 64]).unwrap();
        for off in default_offsets() {
            let m = compute_glcm(&q.full_view(), off, false).unwrap();
            let nonzero: Vec<_> = (0..64 * 64).filter(|&k| m.counts()[k] > 0).collect();
            assert_eq!(nonzero, vec![7 * 64 + 7]);
            assert_eq!(glcm_entropy(&m, LogBase::Natural).unwrap(), 0.0);
        }
    }

    #[test]
    fn stripes_give_two_half_cells() {
        let off = GlcmOffset::new(1, Orientation::Deg0).unwrap();
        // Odd width: each row holds as many 0->1 as 1->0 transitions.
        let m = compute_glcm(&stripes(9, 8).full_view(), off, false).unwrap();
        assert_eq!(m.probability(0, 1), 0.5);
        assert_eq!(m.probability(1, 0), 0.5);
        assert_eq!(m.total(), 64);
        let h = glcm_entropy(&m, LogBase::Natural).unwrap();
        assert!((h - core::f64::consts::LN_2).abs() < 1e-15);
        assert!((glcm_entropy(&m, LogBase::Two).unwrap() - 1.0).abs() < 1e-15);
        // Even width: directed counts split 4:3, symmetric counts balance.
        let m = compute_glcm(&stripes(8, 8).full_view(), off, false).unwrap();
        assert_eq!((m.count(0, 1), m.count(1, 0)), (32, 24));
        let m = compute_glcm(&stripes(8, 8).full_view(), off, true).unwrap();
        assert_eq!(m.probability(0, 1), 0.5);
        assert_eq!(m.probability(1, 0), 0.5);
    }

    #[test]
    fn uniform_matrix_entropy_is_log_support() {
        let m = GlcmMatrix {
            levels: 64,
            counts: vec![3; 64 * 64],
        };
        let h = glcm_entropy(&m, LogBase::Natural).unwrap();
        assert!((h - Float::ln(4096.0f64)).abs() < 1e-9);
        assert!((h - 8.317_766_166_719_343).abs() < 1e-9);
    }

    #[test]
    fn empty_matrix_has_no_entropy() {
        assert_eq!(
            glcm_entropy(&GlcmMatrix::zeros(4), LogBase::Natural),
            Err(Error::EmptyMatrix)
        );
    }

    #[test]
    fn offset_larger_than_patch_rejected() {
        let q = GrayQuantized::from_indices(3, 3, 64, vec![0; 9]).unwrap();
        let off = GlcmOffset::new(3, Orientation::Deg0).unwrap();
        assert!(compute_glcm(&q.full_view(), off, false).is_err());
        let off = GlcmOffset::new(2, Orientation::Deg135).unwrap();
        assert!(compute_glcm(&q.full_view(), off, false).is_ok());
    }

    #[test]
    fn symmetric_doubles_and_mirrors() {
        let q = stripes(6, 4);
        let off = GlcmOffset::new(1, Orientation::Deg45).unwrap();
        let a = compute_glcm(&q.full_view(), off, false).unwrap();
        let s = compute_glcm(&q.full_view(), off, true).unwrap();
        assert_eq!(s.total(), 2 * a.total());
        for i in 0..64 {
            for j in 0..64 {
                assert_eq!(s.count(i, j), a.count(i, j) + a.count(j, i));
            }
        }
    }

    #[test]
    fn constant_image_scores_zero() {
        let img = ImageU8::filled(128, 128, &[90, 90, 90]).unwrap();
        let s = glcm_score(&img, &GlcmConfig::default()).unwrap();
        assert_eq!(s.raw, 0.0);
        assert_eq!(s.normalized, 1.0);
        assert_eq!(s.patch_count, 4);
    }

    #[test]
    fn table_path_matches_direct_entropy() {
        let img = ImageU8::from_fn(64, 64, 1, |x, y, _| ((x * 31 + y * 17) % 256) as u8).unwrap();
        let q = quantize(&img, 64).unwrap();
        let off = GlcmOffset::new(2, Orientation::Deg45).unwrap();
        let m = compute_glcm(&q.full_view(), off, false).unwrap();
        let direct = glcm_entropy(&m, LogBase::Natural).unwrap();
        let table = EntropyTable::new(m.total());
        assert_eq!(table.entropy(m.counts()), direct);
    }

    #[test]
    fn too_small_image_is_empty_grid() {
        let img = ImageU8::filled(63, 63, &[1]).unwrap();
        assert!(matches!(
            glcm_score(&img, &GlcmConfig::default()),
            Err(Error::EmptyGrid { .. })
        ));
    }
}
