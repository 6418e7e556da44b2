use detail4k_core::image::ImageU8;
use detail4k_core::jpeg::{
    decode_baseline, encode_baseline, scale_quant_table, validate_structure, EncoderConfig, QuantTable, Subsampling,
};
use detail4k_core::quality::psnr;
use detail4k_core::Error;
use proptest::prelude::*;

fn smooth_rgb(w: usize, h: usize) -> ImageU8 {
    ImageU8::from_fn(w, h, 3, |x, y, c| {
        let fx = x as f64 / w as f64;
        let fy = y as f64 / h as f64;
        let v = match c {
            0 => 40.0 + 160.0 * fx,
            1 => 60.0 + 120.0 * fy,
            _ => 128.0 + 60.0 * ((fx - 0.5) * (fy - 0.5) * 4.0),
        };
        v.round() as u8
    })
    .unwrap()
}

fn markers(bytes: &[u8]) -> Vec<u8> {
    validate_structure(bytes).unwrap().iter().map(|s| s.marker).collect()
}

#[test]
fn stream_layout() {
    let bytes = encode_baseline(&smooth_rgb(40, 24), &EncoderConfig::default()).unwrap();
    assert_eq!(&bytes[..2], &[0xFF, 0xD8]);
    assert_eq!(&bytes[bytes.len() - 2..], &[0xFF, 0xD9]);
    assert_eq!(
        markers(&bytes),
        vec![0xD8, 0xE0, 0xDB, 0xDB, 0xC0, 0xC4, 0xC4, 0xC4, 0xC4, 0xDA, 0xD9]
    );
    let gray = ImageU8::filled(9, 13, &[77]).unwrap();
    let bytes = encode_baseline(&gray, &EncoderConfig::default()).unwrap();
    assert_eq!(markers(&bytes), vec![0xD8, 0xE0, 0xDB, 0xC0, 0xC4, 0xC4, 0xDA, 0xD9]);
}

#[test]
fn restart_markers_cycle_and_decode() {
    let img = smooth_rgb(100, 70);
    let cfg = EncoderConfig {
        restart_interval: 3,
        ..Default::default()
    };
    let bytes = encode_baseline(&img, &cfg).unwrap();
    let seq = markers(&bytes);
    assert!(seq.contains(&0xDD));
    let rst: Vec<u8> = seq.iter().copied().filter(|m| (0xD0..=0xD7).contains(m)).collect();
    // 7 x 5 MCUs of 16x16, one restart after every 3 except the last group
    assert_eq!(rst.len(), 35usize.div_ceil(3) - 1);
    for (i, m) in rst.iter().enumerate() {
        assert_eq!(*m, 0xD0 + (i % 8) as u8);
    }
    let plain = decode_baseline(&encode_baseline(&img, &EncoderConfig::default()).unwrap()).unwrap();
    assert_eq!(decode_baseline(&bytes).unwrap(), plain);
}

#[test]
fn q95_tables() {
    let l = scale_quant_table(&QuantTable::luminance(), 95).unwrap();
    let c = scale_quant_table(&QuantTable::chrominance(), 95).unwrap();
    assert_eq!(l.zigzag()[0], 2);
    assert_eq!(c.zigzag()[0], 2);
    assert!(scale_quant_table(&QuantTable::luminance(), 0).is_err());
    assert!(scale_quant_table(&QuantTable::luminance(), 101).is_err());
    let q100 = scale_quant_table(&QuantTable::luminance(), 100).unwrap();
    assert!(q100.zigzag().iter().all(|&v| v == 1));
}

#[test]
fn constant_images_round_trip_exactly() {
    for v in [0u8, 1, 77, 128, 200, 255] {
        let img = ImageU8::filled(64, 64, &[v]).unwrap();
        let out = decode_baseline(&encode_baseline(&img, &EncoderConfig::default()).unwrap()).unwrap();
        assert_eq!(out, img, "gray {v}");
    }
}

#[test]
fn smooth_round_trip_quality() {
    for sub in [Subsampling::S420, Subsampling::S444] {
        let img = smooth_rgb(96, 80);
        let cfg = EncoderConfig {
            subsampling: sub,
            ..Default::default()
        };
        let out = decode_baseline(&encode_baseline(&img, &cfg).unwrap()).unwrap();
        let p = psnr(&img, &out).unwrap();
        assert!(p >= 40.0, "{sub:?}: {p:.2} dB");
    }
}

#[test]
fn lower_quality_is_smaller() {
    let img = smooth_rgb(128, 128);
    let noisy = ImageU8::from_fn(128, 128, 3, |x, y, c| ((x * 7919 + y * 104_729 + c * 31) % 251) as u8).unwrap();
    for im in [&img, &noisy] {
        let hi = encode_baseline(im, &EncoderConfig::with_quality(95)).unwrap().len();
        let lo = encode_baseline(im, &EncoderConfig::with_quality(30)).unwrap().len();
        assert!(lo < hi);
    }
}

#[test]
fn rejects_non_baseline_and_damaged_streams() {
    let bytes = encode_baseline(&smooth_rgb(32, 32), &EncoderConfig::default()).unwrap();
    let sof = bytes.windows(2).position(|w| w == [0xFF, 0xC0]).unwrap();
    let mut progressive = bytes.clone();
    progressive[sof + 1] = 0xC2;
    assert!(matches!(decode_baseline(&progressive), Err(Error::Unsupported(_))));
    let mut arithmetic = bytes.clone();
    arithmetic[sof + 1] = 0xC9;
    assert!(matches!(decode_baseline(&arithmetic), Err(Error::Unsupported(_))));

    let truncated = &bytes[..bytes.len() / 2];
    assert!(decode_baseline(truncated).is_err());
    assert!(validate_structure(truncated).is_err());
    assert!(decode_baseline(&[0x00, 0x01, 0x02]).is_err());

    let mut bad_len = bytes.clone();
    bad_len[5] = bad_len[5].wrapping_add(3);
    assert!(validate_structure(&bad_len).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn encoding_is_deterministic_and_decodable(
        w in 1usize..40,
        h in 1usize..40,
        c in prop_oneof![Just(1usize), Just(3usize)],
        q in 1u8..=100,
        seed in any::<u64>(),
    ) {
        let img = ImageU8::from_fn(w, h, c, |x, y, ch| {
            (seed.wrapping_mul(6_364_136_223_846_793_005).wrapping_add((x * 131 + y * 977 + ch * 13) as u64) >> 33) as u8
        }).unwrap();
        let cfg = EncoderConfig::with_quality(q);
        let a = encode_baseline(&img, &cfg).unwrap();
        let b = encode_baseline(&img, &cfg).unwrap();
        prop_assert_eq!(&a, &b);
        validate_structure(&a).unwrap();
        let out = decode_baseline(&a).unwrap();
        prop_assert_eq!((out.width(), out.height(), out.channels()), (w, h, c));
    }
}
