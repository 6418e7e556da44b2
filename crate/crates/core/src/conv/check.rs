//! Randomized equivalence suites for the two layer rewrites, shared by the
//! test suite and the `conv-check` CLI command.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{conv2d, dilate_first_conv, partitioned_upsample_conv, plan_tiles, upsample2x, ConvSpec};
use crate::tensor::Tensor;
use crate::Result;

pub const TOL_F32: f64 = 1e-5;
pub const TOL_F64: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub max_abs_f32: f64,
    pub max_abs_f64: f64,
    /// Descriptions of the cases that exceeded tolerance or errored.
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(name: &'static str) -> Self {
        SuiteReport {
            name,
            cases: 0,
            max_abs_f32: 0.0,
            max_abs_f64: 0.0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.max_abs_f32 <= TOL_F32 && self.max_abs_f64 <= TOL_F64
    }
}

fn random_spec(rng: &mut ChaCha8Rng, k: usize, dilation: usize, padding: usize, stride: usize) -> ConvSpec<f64> {
    let in_ch = rng.random_range(1..=3);
    let out_ch = rng.random_range(1..=3);
    let weights = (0..out_ch * in_ch * k * k)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let bias = (0..out_ch).map(|_| rng.random_range(-0.5..0.5)).collect();
    ConvSpec {
        out_ch,
        in_ch,
        kh: k,
        kw: k,
        weights,
        bias,
        stride: (stride, stride),
        dilation: (dilation, dilation),
        padding: (padding, padding),
    }
}

fn random_input(rng: &mut ChaCha8Rng, c: usize, h: usize, w: usize) -> Tensor<f64> {
    let data = (0..c * h * w).map(|_| rng.random_range(-1.0..1.0)).collect();
    Tensor::new((c, h, w), data).expect("finite random input")
}

fn diff<T: Float>(a: &Tensor<T>, b: &Tensor<T>) -> Option<f64> {
    a.max_abs_diff(b).ok()
}

/// Runs both precisions of one case and folds the result into `report`.
fn record<F>(report: &mut SuiteReport, label: String, mut run: F)
where
    F: FnMut(bool) -> Result<Option<f64>>,
{
    report.cases += 1;
    for single in [true, false] {
        match run(single) {
            Ok(Some(d)) => {
                let (slot, tol) = if single {
                    (&mut report.max_abs_f32, TOL_F32)
                } else {
                    (&mut report.max_abs_f64, TOL_F64)
                };
                *slot = slot.max(d);
                if d > tol {
                    report.failures.push(format!("{label}: max-abs {d:e}"));
                }
            }
            Ok(None) => report.failures.push(format!("{label}: shape mismatch")),
            Err(e) => report.failures.push(format!("{label}: {e}")),
        }
    }
}

/// Tiled upsample-conv against the monolithic path on random kernels with
/// `k in {1,3,5}`, `dilation in {1,2}` and random tilings.
pub fn tiled_suite(cases: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport::new("tiled-vs-monolithic");
    while report.cases < cases {
        let k = [1, 3, 5][rng.random_range(0..3)];
        let d = rng.random_range(1..=2);
        let reach = d * (k - 1);
        let padding = match rng.random_range(0..4) {
            0 => 0,
            1 => reach,
            _ => reach / 2,
        };
        let spec = random_spec(&mut rng, k, d, padding, 1);
        let h = rng.random_range(3..=12);
        let w = rng.random_range(3..=12);
        if spec.output_dims(2 * h, 2 * w).is_none() {
            continue;
        }
        let x = random_input(&mut rng, spec.in_ch, h, w);
        let tile = rng.random_range(1..=h.max(w));
        let label = format!("k={k} d={d} p={padding} in={h}x{w} tile={tile}");
        record(&mut report, label, |single| {
            let plan = plan_tiles(h, w, &spec, tile)?;
            if single {
                let (xs, ss) = (x.cast::<f32>(), spec.cast::<f32>());
                let mono = conv2d(&upsample2x(&xs), &ss)?;
                Ok(diff(&mono, &partitioned_upsample_conv(&xs, &ss, &plan)?))
            } else {
                let mono = conv2d(&upsample2x(&x), &spec)?;
                Ok(diff(&mono, &partitioned_upsample_conv(&x, &spec, &plan)?))
            }
        });
    }
    report
}

/// `dilate_first_conv` with doubled stride on a 2x-upsampled input against
/// the original conv on the original input.
pub fn dilation_suite(cases: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport::new("dilation-duality");
    while report.cases < cases {
        let k = [1, 3, 5][rng.random_range(0..3)];
        let stride = rng.random_range(1..=2);
        let padding = rng.random_range(0..=k / 2);
        let spec = random_spec(&mut rng, k, 1, padding, stride);
        let h = rng.random_range(4..=12);
        let w = rng.random_range(4..=12);
        if spec.output_dims(h, w).is_none() {
            continue;
        }
        let x = random_input(&mut rng, spec.in_ch, h, w);
        let label = format!("k={k} s={stride} p={padding} in={h}x{w}");
        record(&mut report, label, |single| {
            let mut dil = dilate_first_conv(&spec, 2)?;
            dil.stride = (2 * stride, 2 * stride);
            if single {
                let xs = x.cast::<f32>();
                let orig = conv2d(&xs, &spec.cast::<f32>())?;
                Ok(diff(&orig, &conv2d(&upsample2x(&xs), &dil.cast::<f32>())?))
            } else {
                let orig = conv2d(&x, &spec)?;
                Ok(diff(&orig, &conv2d(&upsample2x(&x), &dil)?))
            }
        });
    }
    report
}
