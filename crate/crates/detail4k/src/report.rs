//! JSON and CSV report emission.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::scan::{ReportRecord, ScanReport};

pub const CSV_HEADER: [&str; 8] = [
    "path",
    "width",
    "height",
    "glcm_raw",
    "glcm_normalized",
    "compression_ratio",
    "elapsed_ms",
    "error",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown report format {other:?}")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

fn csv_row(r: &ReportRecord) -> [String; 8] {
    [
        r.path.clone(),
        opt(&r.width),
        opt(&r.height),
        opt(&r.glcm_raw),
        opt(&r.glcm_normalized),
        opt(&r.compression_ratio),
        opt(&r.elapsed_ms),
        opt(&r.error),
    ]
}

/// Records are written in path order regardless of input order.
pub fn write_report<W: Write>(report: &ScanReport, format: Format, mut out: W) -> Result<(), ReportError> {
    let mut sorted = report.clone();
    sorted.records.sort_by(|a, b| a.path.cmp(&b.path));
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &sorted)?;
            out.write_all(b"\n")?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(CSV_HEADER)?;
            for r in &sorted.records {
                w.write_record(csv_row(r))?;
            }
            w.flush()?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn emit_report(report: &ScanReport, format: Format, path: &Path) -> Result<(), ReportError> {
    write_report(report, format, BufWriter::new(File::create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scan::summarize;

    fn record(path: &str, ratio: f64) -> ReportRecord {
        ReportRecord {
            path: path.into(),
            width: Some(64),
            height: Some(32),
            glcm_raw: Some(-1.5),
            glcm_normalized: Some((-1.5f64).exp()),
            compression_ratio: Some(ratio),
            elapsed_ms: None,
            error: None,
        }
    }

    fn render(report: &ScanReport, format: Format) -> String {
        let mut buf = Vec::new();
        write_report(report, format, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_json_has_empty_records() {
        let r = ScanReport {
            stats: summarize(&[]),
            records: vec![],
        };
        let v: serde_json::Value = serde_json::from_str(&render(&r, Format::Json)).unwrap();
        assert_eq!(v["records"], serde_json::json!([]));
        assert_eq!(v["stats"]["count"], 0);
    }

    #[test]
    fn csv_header_and_rows_sorted() {
        let records = vec![record("b.png", 2.0), record("a.png", 3.5)];
        let r = ScanReport {
            stats: summarize(&records),
            records,
        };
        let text = render(&r, Format::Csv);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(
            lines[0],
            "path,width,height,glcm_raw,glcm_normalized,compression_ratio,elapsed_ms,error"
        );
        assert!(lines[1].starts_with("a.png,64,32,-1.5,"));
        assert!(lines[2].ends_with(",2,,"));
    }
}
