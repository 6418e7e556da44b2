use std::fs;
use std::path::Path;

use detail4k::{decode_bytes, encode_png, scan_and_score, write_report, Format, ScanConfig};
use detail4k_core::image::ImageU8;
use detail4k_core::jpeg::{encode_baseline, EncoderConfig};
use detail4k_core::quality::psnr;

fn gray(w: usize, h: usize, v: u8) -> ImageU8 {
    ImageU8::filled(w, h, &[v, v, v]).unwrap()
}

fn textured(w: usize, h: usize) -> ImageU8 {
    ImageU8::from_fn(w, h, 3, |x, y, c| ((x * 7 + y * 13 + c * 40) % 256) as u8).unwrap()
}

fn put_png(dir: &Path, name: &str, img: &ImageU8) {
    let path = dir.join(name);
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(path, encode_png(img).unwrap()).unwrap();
}

fn no_timing(jobs: usize) -> ScanConfig {
    ScanConfig {
        jobs,
        timing: false,
        ..Default::default()
    }
}

fn render(dir: &Path, cfg: &ScanConfig, format: Format) -> Vec<u8> {
    let mut buf = Vec::new();
    write_report(&scan_and_score(dir, cfg).unwrap(), format, &mut buf).unwrap();
    buf
}

#[test]
fn empty_directory_gives_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("notes.txt"), "not an image").unwrap();
    let report = scan_and_score(dir.path(), &no_timing(1)).unwrap();
    assert!(report.records.is_empty());
    assert_eq!(report.stats.count, 0);
    assert_eq!(report.stats.median_height, None);
}

#[test]
fn missing_directory_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(scan_and_score(&dir.path().join("absent"), &no_timing(1)).is_err());
}

#[test]
fn dimension_statistics() {
    let dir = tempfile::tempdir().unwrap();
    for (i, (h, w)) in [(100, 200), (300, 400), (500, 600)].into_iter().enumerate() {
        put_png(dir.path(), &format!("img{i}.png"), &gray(w, h, 90));
    }
    let s = scan_and_score(dir.path(), &no_timing(2)).unwrap().stats;
    assert_eq!(s.count, 3);
    assert_eq!(s.median_height, Some(300.0));
    assert_eq!(s.median_width, Some(400.0));
    assert_eq!(s.mean_height, Some(300.0));
    assert_eq!(s.mean_width, Some(400.0));
    assert_eq!(s.height_histogram.counts, vec![3]);
    assert_eq!(s.width_histogram.counts, vec![2, 1]);
    assert_eq!(s.mean_glcm_raw, Some(0.0));
    assert_eq!(s.mean_glcm_normalized, Some(1.0));
}

#[test]
fn bad_files_do_not_abort_the_scan() {
    let dir = tempfile::tempdir().unwrap();
    put_png(dir.path(), "good.png", &textured(96, 80));
    put_png(dir.path(), "nested/deeper/good2.png", &textured(64, 64));
    let jpeg = encode_baseline(&textured(64, 64), &EncoderConfig::default()).unwrap();
    fs::write(dir.path().join("truncated.jpg"), &jpeg[..jpeg.len() / 3]).unwrap();
    fs::write(dir.path().join("garbage.png"), b"definitely not a png").unwrap();
    put_png(dir.path(), "tiny.png", &gray(40, 40, 7));

    let report = scan_and_score(dir.path(), &no_timing(3)).unwrap();
    let by_path: Vec<(&str, bool)> = report.records.iter().map(|r| (r.path.as_str(), r.is_ok())).collect();
    assert_eq!(
        by_path,
        vec![
            ("garbage.png", false),
            ("good.png", true),
            ("nested/deeper/good2.png", true),
            ("tiny.png", false),
            ("truncated.jpg", false),
        ]
    );
    for r in &report.records {
        if r.is_ok() {
            assert!(r.glcm_raw.unwrap() <= 0.0);
            let n = r.glcm_normalized.unwrap();
            assert!(n > 0.0 && n <= 1.0);
            assert!(r.compression_ratio.unwrap() > 0.0);
        } else {
            assert!(r.glcm_raw.is_none() && r.compression_ratio.is_none());
            assert!(!r.error.as_deref().unwrap().is_empty());
        }
    }
    let tiny = &report.records[3];
    assert_eq!((tiny.width, tiny.height), (Some(40), Some(40)));
    assert_eq!(report.stats.count, 3);
}

#[test]
fn reports_are_reproducible_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    for i in 0..6 {
        put_png(dir.path(), &format!("f{i}.png"), &textured(64 + 16 * i, 64));
    }
    for format in [Format::Json, Format::Csv] {
        let one = render(dir.path(), &no_timing(1), format);
        let four = render(dir.path(), &no_timing(4), format);
        assert_eq!(one, four);
        assert_eq!(one, render(dir.path(), &no_timing(1), format));
    }
}

#[test]
fn timing_is_recorded_when_enabled() {
    let dir = tempfile::tempdir().unwrap();
    put_png(dir.path(), "a.png", &textured(64, 64));
    let report = scan_and_score(dir.path(), &ScanConfig::default()).unwrap();
    assert!(report.records[0].elapsed_ms.unwrap() >= 0.0);
}

#[test]
fn encoder_output_decodes_with_an_independent_decoder() {
    let img = ImageU8::from_fn(77, 53, 3, |x, y, c| {
        (60.0 + 40.0 * ((x as f64 / 9.0).sin() + (y as f64 / 7.0).cos()) + 20.0 * c as f64) as u8
    })
    .unwrap();
    let mut cfgs = vec![EncoderConfig::default()];
    cfgs.push(EncoderConfig {
        subsampling: detail4k_core::jpeg::Subsampling::S444,
        restart_interval: 4,
        ..Default::default()
    });
    for cfg in cfgs {
        let bytes = encode_baseline(&img, &cfg).unwrap();
        let decoded = decode_bytes(&bytes).unwrap();
        assert_eq!((decoded.width(), decoded.height(), decoded.channels()), (77, 53, 3));
        let ours = detail4k_core::jpeg::decode_baseline(&bytes).unwrap();
        assert!(psnr(&img, &decoded).unwrap() > 38.0);
        assert!(psnr(&ours, &decoded).unwrap() > 45.0);
    }
    let luma = ImageU8::from_fn(40, 24, 1, |x, y, _| (x * 5 + y * 3) as u8).unwrap();
    let decoded = decode_bytes(&encode_baseline(&luma, &EncoderConfig::default()).unwrap()).unwrap();
    assert_eq!(decoded.channels(), 1);
    assert!(psnr(&luma, &decoded).unwrap() > 40.0);
}

#[test]
fn shipped_photos_decode() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/photos");
    let report = scan_and_score(&dir, &no_timing(0)).unwrap();
    assert_eq!(report.records.len(), 4);
    assert!(report.records.iter().all(|r| r.is_ok()), "{:?}", report.records);
}
