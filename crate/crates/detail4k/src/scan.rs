//! Directory scanning and parallel per-file scoring.

use std::path::{Path, PathBuf};
use std::time::Instant;

use detail4k_core::detail::{detail_scores, GlcmConfig};
use detail4k_core::jpeg::EncoderConfig;
use detail4k_core::stats::DatasetStats;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decode::{decode_file, is_image_path};

#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub glcm: GlcmConfig,
    pub jpeg: EncoderConfig,
    /// Worker threads; 0 means one per logical core.
    pub jobs: usize,
    /// Record per-file wall-clock time. Off makes reports byte-reproducible.
    pub timing: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            glcm: GlcmConfig::default(),
            jpeg: EncoderConfig::default(),
            jobs: 0,
            timing: true,
        }
    }
}

/// One scanned file. Either all three metric fields or `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    /// Relative to the scanned directory, `/`-separated.
    pub path: String,
    pub width: Option<usize>,
    pub height: Option<usize>,
    pub glcm_raw: Option<f64>,
    pub glcm_normalized: Option<f64>,
    pub compression_ratio: Option<f64>,
    pub elapsed_ms: Option<f64>,
    pub error: Option<String>,
}

impl ReportRecord {
    fn failed(path: String, error: String) -> Self {
        ReportRecord {
            path,
            width: None,
            height: None,
            glcm_raw: None,
            glcm_normalized: None,
            compression_ratio: None,
            elapsed_ms: None,
            error: Some(error),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub stats: DatasetStats,
    pub records: Vec<ReportRecord>,
}

#[derive(Debug, thiserror::Error)]
pub enum ScanError {
    #[error("cannot read directory {path}: {source}")]
    Directory {
        path: PathBuf,
        #[source]
        source: walkdir::Error,
    },
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Image files under `dir` (recursively), sorted by relative path.
pub fn list_images(dir: &Path) -> Result<Vec<(String, PathBuf)>, ScanError> {
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(dir).follow_links(true) {
        let entry = entry.map_err(|source| ScanError::Directory {
            path: dir.to_path_buf(),
            source,
        })?;
        if entry.file_type().is_file() && is_image_path(entry.path()) {
            let rel = entry.path().strip_prefix(dir).unwrap_or(entry.path());
            let key = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            files.push((key, entry.path().to_path_buf()));
        }
    }
    files.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(files)
}

pub fn score_file(rel: String, path: &Path, cfg: &ScanConfig) -> ReportRecord {
    let start = Instant::now();
    let img = match decode_file(path) {
        Ok(img) => img,
        Err(e) => return ReportRecord::failed(rel, e.to_string()),
    };
    let mut rec = match detail_scores(&img, &cfg.glcm, &cfg.jpeg) {
        Ok(s) => ReportRecord {
            path: rel,
            width: None,
            height: None,
            glcm_raw: Some(s.glcm_raw),
            glcm_normalized: Some(s.glcm_normalized),
            compression_ratio: Some(s.compression_ratio),
            elapsed_ms: None,
            error: None,
        },
        Err(e) => ReportRecord::failed(rel, e.to_string()),
    };
    rec.width = Some(img.width());
    rec.height = Some(img.height());
    if cfg.timing {
        rec.elapsed_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    rec
}

/// Scores every image under `dir` on a pool of `cfg.jobs` workers. A file
/// that fails to read, decode or score gets an error record; only an
/// unreadable directory aborts.
pub fn scan_and_score(dir: &Path, cfg: &ScanConfig) -> Result<ScanReport, ScanError> {
    let files = list_images(dir)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build()?;
    let records: Vec<ReportRecord> = pool.install(|| {
        files
            .into_par_iter()
            .map(|(rel, path)| score_file(rel, &path, cfg))
            .collect()
    });
    Ok(ScanReport {
        stats: summarize(&records),
        records,
    })
}

/// Dimension statistics over decoded images, metric means over scored ones.
pub fn summarize(records: &[ReportRecord]) -> DatasetStats {
    let dims: Vec<(u32, u32)> = records
        .iter()
        .filter_map(|r| Some((r.width? as u32, r.height? as u32)))
        .collect();
    let ok = || records.iter().filter(|r| r.is_ok());
    let raw: Vec<f64> = ok().filter_map(|r| r.glcm_raw).collect();
    let norm: Vec<f64> = ok().filter_map(|r| r.glcm_normalized).collect();
    let ratio: Vec<f64> = ok().filter_map(|r| r.compression_ratio).collect();
    DatasetStats::from_dims(&dims).with_metric_means(&raw, &norm, &ratio)
}
