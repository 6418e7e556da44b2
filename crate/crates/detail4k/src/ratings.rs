//! Joining metric reports with reference ratings for correlation analysis.

use std::collections::BTreeMap;
use std::io::Read;

use detail4k_core::stats::{plcc, srcc, RatingSeries};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    GlcmRaw,
    GlcmNormalized,
    CompressionRatio,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::GlcmRaw, Metric::GlcmNormalized, Metric::CompressionRatio];

    pub fn name(self) -> &'static str {
        match self {
            Metric::GlcmRaw => "glcm_raw",
            Metric::GlcmNormalized => "glcm_normalized",
            Metric::CompressionRatio => "compression_ratio",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RatingsError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Join(String),
    #[error(transparent)]
    Stats(#[from] detail4k_core::Error),
}

#[derive(Debug, Deserialize)]
struct MetricRow {
    path: String,
    glcm_raw: Option<f64>,
    glcm_normalized: Option<f64>,
    compression_ratio: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct RatingRow {
    path: String,
    rating: f64,
}

/// Scored rows of a report CSV, keyed by path. Error rows are skipped.
pub fn read_metrics<R: Read>(input: R) -> Result<BTreeMap<String, [Option<f64>; 3]>, RatingsError> {
    let mut out = BTreeMap::new();
    for row in csv::Reader::from_reader(input).deserialize() {
        let row: MetricRow = row?;
        out.insert(row.path, [row.glcm_raw, row.glcm_normalized, row.compression_ratio]);
    }
    Ok(out)
}

/// `path,rating` CSV.
pub fn read_ratings<R: Read>(input: R) -> Result<BTreeMap<String, f64>, RatingsError> {
    let mut out = BTreeMap::new();
    for row in csv::Reader::from_reader(input).deserialize() {
        let row: RatingRow = row?;
        if out.insert(row.path.clone(), row.rating).is_some() {
            return Err(RatingsError::Join(format!("duplicate rating for {}", row.path)));
        }
    }
    Ok(out)
}

/// Pairs metric values with ratings over the paths present in both, in
/// path order. `reciprocal` replaces each metric value `v` by `1 / v`.
pub fn join(
    metrics: &BTreeMap<String, [Option<f64>; 3]>,
    ratings: &BTreeMap<String, f64>,
    metric: Metric,
    reciprocal: bool,
) -> Result<RatingSeries, RatingsError> {
    let idx = Metric::ALL.iter().position(|&m| m == metric).unwrap_or(0);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (path, rating) in ratings {
        if let Some(v) = metrics.get(path).and_then(|row| row[idx]) {
            xs.push(if reciprocal { 1.0 / v } else { v });
            ys.push(*rating);
        }
    }
    Ok(RatingSeries::new(xs, ys)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub n: usize,
    pub srcc: f64,
    pub plcc: f64,
}

pub fn correlate(series: &RatingSeries) -> Result<Correlation, RatingsError> {
    Ok(Correlation {
        n: series.len(),
        srcc: srcc(series)?,
        plcc: plcc(series)?,
    })
}
