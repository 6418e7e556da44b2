//! File-level tooling around `detail4k-core`: image decoding, parallel
//! directory scoring, JSON/CSV reports, rating correlation and a seeded
//! synthetic corpus. The `detail4k` binary exposes all of it on the
//! command line.

pub mod corpus;
pub mod decode;
pub mod ratings;
pub mod report;
pub mod scan;

/// Process exit codes of the command line tool.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const IO: i32 = 1;
    pub const CONTRACT: i32 = 2;
    pub const EQUIVALENCE: i32 = 3;
}

pub use decode::{decode_bytes, decode_file, encode_png};
pub use report::{emit_report, write_report, Format};
pub use scan::{scan_and_score, ReportRecord, ScanConfig, ScanReport};
