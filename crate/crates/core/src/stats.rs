//! Rank and linear correlation plus image-dimension statistics.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::{Error, Result};

/// Paired metric values and reference ratings.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingSeries {
    metric: Vec<f64>,
    rating: Vec<f64>,
}

impl RatingSeries {
    pub fn new(metric: Vec<f64>, rating: Vec<f64>) -> Result<Self> {
        if metric.len() != rating.len() {
            return Err(Error::contract("metric and rating series differ in length"));
        }
        if metric.len() < 3 {
            return Err(Error::contract("correlation needs at least 3 pairs"));
        }
        if metric.iter().chain(&rating).any(|v| v.is_nan()) {
            return Err(Error::contract("series contain NaN"));
        }
        Ok(RatingSeries { metric, rating })
    }

    pub fn metric(&self) -> &[f64] {
        &self.metric
    }

    pub fn rating(&self) -> &[f64] {
        &self.rating
    }

    pub fn len(&self) -> usize {
        self.metric.len()
    }

    pub fn is_empty(&self) -> bool {
        self.metric.is_empty()
    }
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let mean = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = mean;
        }
        i = j;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::UndefinedCorrelation("metric series has zero variance"));
    }
    if syy == 0.0 {
        return Err(Error::UndefinedCorrelation("rating series has zero variance"));
    }
    Ok((sxy / Float::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Pearson linear correlation coefficient.
pub fn plcc(series: &RatingSeries) -> Result<f64> {
    pearson(&series.metric, &series.rating)
}

/// Spearman rank-order correlation: Pearson over fractional ranks.
pub fn srcc(series: &RatingSeries) -> Result<f64> {
    pearson(&fractional_ranks(&series.metric), &fractional_ranks(&series.rating))
}

/// Median; even-length input averages the two central values.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) {
        (v[mid - 1] + v[mid]) / 2.0
    } else {
        v[mid]
    })
}

pub const HISTOGRAM_BIN: u32 = 512;

/// Counts per `[k * bin, (k + 1) * bin)` bucket.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Histogram {
    pub bin_width: u32,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn build(values: &[u32], bin_width: u32) -> Self {
        let mut counts = Vec::new();
        for &v in values {
            let b = (v / bin_width) as usize;
            if counts.len() <= b {
                counts.resize(b + 1, 0);
            }
            counts[b] += 1;
        }
        Histogram { bin_width, counts }
    }
}

/// Height/width summary over the successfully decoded images of a corpus.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DatasetStats {
    pub count: usize,
    pub median_height: Option<f64>,
    pub mean_height: Option<f64>,
    pub median_width: Option<f64>,
    pub mean_width: Option<f64>,
    pub height_histogram: Histogram,
    pub width_histogram: Histogram,
    /// Mean per-image metric values over the scored images.
    pub mean_glcm_raw: Option<f64>,
    pub mean_glcm_normalized: Option<f64>,
    pub mean_compression_ratio: Option<f64>,
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

impl DatasetStats {
    /// `dims` are `(width, height)` pairs.
    pub fn from_dims(dims: &[(u32, u32)]) -> Self {
        let widths: Vec<u32> = dims.iter().map(|d| d.0).collect();
        let heights: Vec<u32> = dims.iter().map(|d| d.1).collect();
        let wf: Vec<f64> = widths.iter().map(|&v| v as f64).collect();
        let hf: Vec<f64> = heights.iter().map(|&v| v as f64).collect();
        DatasetStats {
            count: dims.len(),
            median_height: median(&hf),
            mean_height: mean(&hf),
            median_width: median(&wf),
            mean_width: mean(&wf),
            height_histogram: Histogram::build(&heights, HISTOGRAM_BIN),
            width_histogram: Histogram::build(&widths, HISTOGRAM_BIN),
            ..Default::default()
        }
    }

    /// Adds metric means; each slice holds one value per scored image.
    pub fn with_metric_means(mut self, glcm_raw: &[f64], glcm_normalized: &[f64], ratio: &[f64]) -> Self {
        self.mean_glcm_raw = mean(glcm_raw);
        self.mean_glcm_normalized = mean(glcm_normalized);
        self.mean_compression_ratio = mean(ratio);
        self
    }
}
