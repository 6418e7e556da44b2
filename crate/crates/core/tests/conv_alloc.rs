//! Peak scratch allocation of the tiled upsample-conv, measured with a
//! counting global allocator. Kept in its own test binary with one test so
//! no other test allocates concurrently.

use std::alloc::{GlobalAlloc, Layout, System};
use std::sync::atomic::{AtomicUsize, Ordering};

use detail4k_core::conv::{conv2d, partitioned_upsample_conv_into, plan_tiles, upsample2x, ConvSpec};
use detail4k_core::TensorF;

struct Counting;

static CURRENT: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for Counting {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = unsafe { System.alloc(layout) };
        if !p.is_null() {
            let now = CURRENT.fetch_add(layout.size(), Ordering::SeqCst) + layout.size();
            PEAK.fetch_max(now, Ordering::SeqCst);
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        unsafe { System.dealloc(ptr, layout) };
        CURRENT.fetch_sub(layout.size(), Ordering::SeqCst);
    }
}

#[global_allocator]
static GLOBAL: Counting = Counting;

/// Bytes allocated above the starting level while `f` runs.
fn peak_scratch(f: impl FnOnce()) -> usize {
    let base = CURRENT.load(Ordering::SeqCst);
    PEAK.store(base, Ordering::SeqCst);
    f();
    PEAK.load(Ordering::SeqCst) - base
}

fn spec() -> ConvSpec<f32> {
    let weights = (0..4 * 4 * 9).map(|i| ((i * 37 % 17) as f32 - 8.0) / 8.0).collect();
    ConvSpec::new((4, 4, 3, 3), weights, vec![0.1; 4])
        .unwrap()
        .with_padding(1, 1)
}

fn input(n: usize) -> TensorF {
    TensorF::from_fn((4, n, n), |c, y, x| ((c * 7 + y * 3 + x) % 11) as f32 / 11.0)
}

#[test]
fn scratch_tracks_tile_size_not_input_size() {
    let spec = spec();
    let tile = 8;
    let mut scratch = Vec::new();
    for n in [32usize, 128] {
        let x = input(n);
        let plan = plan_tiles(n, n, &spec, tile).unwrap();
        let mut out = TensorF::zeros((4, 2 * n, 2 * n));
        let bytes = peak_scratch(|| partitioned_upsample_conv_into(&x, &spec, &plan, &mut out).unwrap());
        assert_eq!(out, conv2d(&upsample2x(&x), &spec).unwrap());
        scratch.push(bytes);
    }
    let upsampled_large = 4 * 256 * 256 * std::mem::size_of::<f32>();
    // padded tile: (8 + 2 halo-covering rows) upsampled, 4 channels, plus the low-res window
    let tile_bound = 4 * (2 * tile + 4) * (2 * tile + 4) * 4 * 2;
    assert!(scratch[0] <= tile_bound, "{scratch:?} vs tile bound {tile_bound}");
    assert!(scratch[1] <= tile_bound, "{scratch:?} vs tile bound {tile_bound}");
    assert!(
        scratch[1] <= scratch[0] + scratch[0] / 10,
        "scratch grew with input: {scratch:?}"
    );
    assert!(scratch[1] * 50 < upsampled_large);

    let x = input(128);
    let mono = peak_scratch(|| {
        let _ = conv2d(&upsample2x(&x), &spec).unwrap();
    });
    assert!(mono >= upsampled_large, "monolithic peak {mono}");
}
