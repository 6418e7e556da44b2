use detail4k_core::conv::check::{dilation_suite, tiled_suite};
use detail4k_core::conv::{
    conv2d, conv_output_dim, dilate_first_conv, partitioned_upsample_conv, plan_tiles, upsample2x, ConvSpec,
};
use detail4k_core::{Tensor, TensorF};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Direct transcription of the cross-correlation sum with explicit padding.
fn naive(x: &Tensor<f64>, s: &ConvSpec<f64>) -> Tensor<f64> {
    let (c, h, w) = x.shape();
    let (ph, pw) = (h + 2 * s.padding.0, w + 2 * s.padding.1);
    let mut padded = vec![0.0; c * ph * pw];
    for ci in 0..c {
        for y in 0..h {
            for xx in 0..w {
                padded[(ci * ph + y + s.padding.0) * pw + xx + s.padding.1] = x[(ci, y, xx)];
            }
        }
    }
    let oh = (ph - s.dilation.0 * (s.kh - 1) - 1) / s.stride.0 + 1;
    let ow = (pw - s.dilation.1 * (s.kw - 1) - 1) / s.stride.1 + 1;
    Tensor::from_fn((s.out_ch, oh, ow), |o, oy, ox| {
        let mut acc = s.bias[o];
        for i in 0..s.in_ch {
            for ky in 0..s.kh {
                for kx in 0..s.kw {
                    let y = oy * s.stride.0 + ky * s.dilation.0;
                    let xx = ox * s.stride.1 + kx * s.dilation.1;
                    acc += s.weights[((o * s.in_ch + i) * s.kh + ky) * s.kw + kx] * padded[(i * ph + y) * pw + xx];
                }
            }
        }
        acc
    })
}

fn random_spec(rng: &mut ChaCha8Rng, cin: usize, cout: usize, kh: usize, kw: usize) -> ConvSpec<f64> {
    let weights = (0..cout * cin * kh * kw).map(|_| rng.random_range(-1.0..1.0)).collect();
    let bias = (0..cout).map(|_| rng.random_range(-1.0..1.0)).collect();
    ConvSpec::new((cout, cin, kh, kw), weights, bias).unwrap()
}

fn random_tensor(rng: &mut ChaCha8Rng, shape: (usize, usize, usize)) -> Tensor<f64> {
    Tensor::from_fn(shape, |_, _, _| rng.random_range(-1.0..1.0))
}

#[test]
fn conv2d_matches_naive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 200 {
        let (kh, kw) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let (cin, cout) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let spec = random_spec(&mut rng, cin, cout, kh, kw)
            .with_stride(rng.random_range(1..=3), rng.random_range(1..=3))
            .with_dilation(rng.random_range(1..=3), rng.random_range(1..=3))
            .with_padding(rng.random_range(0..=3), rng.random_range(0..=3));
        let (h, w) = (rng.random_range(1..=8), rng.random_range(1..=8));
        let x = random_tensor(&mut rng, (spec.in_ch, h, w));
        match spec.output_dims(h, w) {
            None => assert!(conv2d(&x, &spec).is_err()),
            Some(dims) => {
                let y = conv2d(&x, &spec).unwrap();
                assert_eq!((y.height(), y.width()), dims);
                let diff = y.max_abs_diff(&naive(&x, &spec)).unwrap();
                assert!(diff < 1e-12, "{diff}");
                checked += 1;
            }
        }
    }
}

#[test]
fn channel_mismatch_is_contract_violation() {
    let spec = random_spec(&mut ChaCha8Rng::seed_from_u64(1), 2, 1, 3, 3);
    let err = conv2d(&Tensor::<f64>::zeros((3, 5, 5)), &spec).unwrap_err();
    assert!(err.is_contract_violation());
}

#[test]
fn random_3x3_on_16x16_with_2x2_tiles() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spec = random_spec(&mut rng, 3, 4, 3, 3).with_padding(1, 1).cast::<f32>();
    let x: TensorF = random_tensor(&mut rng, (3, 16, 16)).cast();
    let plan = plan_tiles(16, 16, &spec, 8).unwrap();
    assert_eq!(plan.len(), 4);
    let tiled = partitioned_upsample_conv(&x, &spec, &plan).unwrap();
    let mono = conv2d(&upsample2x(&x), &spec).unwrap();
    assert!(tiled.max_abs_diff(&mono).unwrap() <= 1e-6);
}

#[test]
fn single_tile_is_bitwise_monolithic() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let spec = random_spec(&mut rng, 2, 2, 5, 5).with_dilation(2, 2).with_padding(4, 4);
    let x = random_tensor(&mut rng, (2, 9, 7));
    let plan = plan_tiles(9, 7, &spec, 64).unwrap();
    assert_eq!(plan.len(), 1);
    assert_eq!(
        partitioned_upsample_conv(&x, &spec, &plan).unwrap(),
        conv2d(&upsample2x(&x), &spec).unwrap()
    );
}

#[test]
fn pointwise_kernel_any_tiling_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let spec = random_spec(&mut rng, 3, 2, 1, 1);
    let x = random_tensor(&mut rng, (3, 11, 6));
    let mono = conv2d(&upsample2x(&x), &spec).unwrap();
    for tile in 1..=11 {
        let plan = plan_tiles(11, 6, &spec, tile).unwrap();
        assert_eq!(plan.halo, (0, 0));
        assert_eq!(partitioned_upsample_conv(&x, &spec, &plan).unwrap(), mono);
    }
}

#[test]
fn dilated_kernel_reads_original_lattice() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let spec = random_spec(&mut rng, 1, 1, 3, 3).with_padding(1, 1);
    let mut x = Tensor::<f64>::zeros((1, 8, 8));
    x[(0, 3, 4)] = 1.0;
    let mut dil = dilate_first_conv(&spec, 2).unwrap();
    dil.stride = (2, 2);
    let a = conv2d(&x, &spec).unwrap();
    let b = conv2d(&upsample2x(&x), &dil).unwrap();
    assert_eq!(a, b);
}

#[test]
fn random_3x3_duality_on_8x8() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let spec = random_spec(&mut rng, 3, 3, 3, 3).with_padding(1, 1).cast::<f32>();
    let x: TensorF = random_tensor(&mut rng, (3, 8, 8)).cast();
    let mut dil = dilate_first_conv(&spec, 2).unwrap();
    dil.stride = (2, 2);
    let diff = conv2d(&upsample2x(&x), &dil)
        .unwrap()
        .max_abs_diff(&conv2d(&x, &spec).unwrap())
        .unwrap();
    assert!(diff <= 1e-6);
}

#[test]
fn equivalence_suites() {
    let t = tiled_suite(200, 42);
    assert_eq!(t.cases, 200);
    assert!(
        t.passed(),
        "{:?} f32 {} f64 {}",
        t.failures,
        t.max_abs_f32,
        t.max_abs_f64
    );
    let d = dilation_suite(100, 42);
    assert_eq!(d.cases, 100);
    assert!(d.passed(), "{:?}", d.failures);
}

proptest! {
    #[test]
    fn output_shape_matches_formula(
        h in 1usize..20, w in 1usize..20, k in 1usize..6, s in 1usize..4, d in 1usize..4, p in 0usize..4,
    ) {
        let spec = ConvSpec::new((1, 1, k, k), vec![1.0f64; k * k], vec![0.0]).unwrap()
            .with_stride(s, s).with_dilation(d, d).with_padding(p, p);
        let x = Tensor::<f64>::zeros((1, h, w));
        match (conv_output_dim(h, k, s, d, p), conv_output_dim(w, k, s, d, p)) {
            (Some(oh), Some(ow)) => {
                let y = conv2d(&x, &spec).unwrap();
                prop_assert_eq!((y.height(), y.width()), (oh, ow));
                prop_assert_eq!(oh, (h + 2 * p - d * (k - 1) - 1) / s + 1);
            }
            _ => prop_assert!(conv2d(&x, &spec).is_err()),
        }
    }

    #[test]
    fn duality_preserves_output_dims(h in 1usize..30, k in 1usize..6, s in 1usize..4, p in 0usize..3) {
        if let Some(orig) = conv_output_dim(h, k, s, 1, p) {
            prop_assert_eq!(conv_output_dim(2 * h, k, 2 * s, 2, 2 * p), Some(orig));
        }
    }

    #[test]
    fn tile_interiors_partition_output(
        h in 1usize..40, w in 1usize..40, tile in 1usize..20, k in prop_oneof![Just(1usize), Just(3), Just(5)],
        d in 1usize..=2, pad_sel in 0usize..3,
    ) {
        let reach = d * (k - 1);
        let p = [0, reach / 2, reach][pad_sel];
        let spec = ConvSpec::new((1, 1, k, k), vec![1.0f64; k * k], vec![0.0]).unwrap()
            .with_dilation(d, d).with_padding(p, p);
        let plan = plan_tiles(h, w, &spec, tile).unwrap();
        prop_assert!(plan.halo.0 >= reach.div_ceil(2));
        if let Some((oh, ow)) = spec.output_dims(2 * h, 2 * w) {
            let mut owner = vec![0u32; oh * ow];
            for t in 0..plan.len() {
                let (rows, cols) = plan.owned_output(t, oh, ow);
                for y in rows {
                    for x in cols.clone() {
                        owner[y * ow + x] += 1;
                    }
                }
            }
            prop_assert!(owner.iter().all(|&c| c == 1));
        }
        let mut covered = vec![0u32; h * w];
        for t in 0..plan.len() {
            let (y, x, th, tw) = plan.tile(t);
            for yy in y..y + th {
                for xx in x..x + tw {
                    covered[yy * w + xx] += 1;
                }
            }
        }
        prop_assert!(covered.iter().all(|&c| c == 1));
    }
}
