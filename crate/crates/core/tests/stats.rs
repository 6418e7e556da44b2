use detail4k_core::stats::{fractional_ranks, plcc, srcc, RatingSeries};
use proptest::prelude::*;

fn distinct_series() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (3usize..30).prop_flat_map(|n| {
        (
            proptest::collection::vec(-100.0f64..100.0, n),
            proptest::collection::vec(-100.0f64..100.0, n),
        )
    })
}

fn has_variance(v: &[f64]) -> bool {
    v.iter().any(|&x| x != v[0])
}

/// Spreadsheet-style Pearson: `(n sxy - sx sy) / sqrt((n sxx - sx^2)(n syy - sy^2))`.
fn textbook_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt()
}

#[test]
fn plcc_on_outlier_series_matches_textbook() {
    let x = [1.0, 2.0, 3.0, 4.0];
    let y = [1.0, 2.0, 3.0, 100.0];
    let r = plcc(&RatingSeries::new(x.to_vec(), y.to_vec()).unwrap()).unwrap();
    assert!(r > 0.0 && r < 1.0);
    assert!((r - textbook_pearson(&x, &y)).abs() < 1e-12);
}

#[test]
fn srcc_with_ties_matches_hand_ranks() {
    // ranks of [1,2,2,3] are [1,2.5,2.5,4]; against [1,2,3,4] Pearson gives
    // cov 4.5 / sqrt(4.5 * 5) = 3/sqrt(10)
    let s = RatingSeries::new(vec![1.0, 2.0, 2.0, 3.0], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    assert!((srcc(&s).unwrap() - 3.0 / 10f64.sqrt()).abs() < 1e-12);
    assert_eq!(fractional_ranks(&[3.0, 2.0, 2.0, 1.0]), vec![4.0, 2.5, 2.5, 1.0]);
}

proptest! {
    #[test]
    fn srcc_invariant_under_monotone_maps((x, y) in distinct_series()) {
        prop_assume!(has_variance(&x) && has_variance(&y));
        let base = srcc(&RatingSeries::new(x.clone(), y.clone()).unwrap()).unwrap();
        let fx: Vec<f64> = x.iter().map(|v| (v / 40.0).exp()).collect();
        let fy: Vec<f64> = y.iter().map(|v| v * v * v + 5.0 * v).collect();
        let mapped = srcc(&RatingSeries::new(fx, fy).unwrap()).unwrap();
        prop_assert!((base - mapped).abs() < 1e-9);
        prop_assert!((-1.0..=1.0).contains(&base));
    }

    #[test]
    fn plcc_affine_invariance_and_sign((x, y) in distinct_series(), a in 0.1f64..10.0, b in -50.0f64..50.0) {
        prop_assume!(has_variance(&x) && has_variance(&y));
        let base = plcc(&RatingSeries::new(x.clone(), y.clone()).unwrap()).unwrap();
        let ax: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let scaled = plcc(&RatingSeries::new(ax, y.clone()).unwrap()).unwrap();
        prop_assert!((base - scaled).abs() < 1e-9);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let flipped = plcc(&RatingSeries::new(neg, y.clone()).unwrap()).unwrap();
        prop_assert!((base + flipped).abs() < 1e-12);
        prop_assert!((base - textbook_pearson(&x, &y)).abs() < 1e-6);
    }

    #[test]
    fn affine_relation_gives_one(x in proptest::collection::vec(-100.0f64..100.0, 3..30), a in 0.1f64..10.0, b in -5.0f64..5.0) {
        prop_assume!(has_variance(&x));
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let s = RatingSeries::new(x, y).unwrap();
        prop_assert!((plcc(&s).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((srcc(&s).unwrap() - 1.0).abs() < 1e-12);
    }
}
