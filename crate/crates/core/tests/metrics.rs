use edbsw_core::metrics::*;
use edbsw_core::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_grid(h: usize, w: usize, seed: u64) -> ImageGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ImageGrid::from_fn(h, w, |_, _| rng.random::<f64>())
}

#[test]
fn mse_basics_and_oracle() {
    let a = random_grid(16, 20, 1);
    let b = random_grid(16, 20, 2);
    assert_eq!(mse(&a, &a).unwrap(), 0.0);
    assert_eq!(mse(&ImageGrid::zeros(4, 4), &ImageGrid::filled(4, 4, 1.0)).unwrap(), 1.0);
    let mut acc = 0.0;
    for r in 0..16 {
        for c in 0..20 {
            acc += (a.get(r, c) - b.get(r, c)).powi(2);
        }
    }
    assert!((mse(&a, &b).unwrap() - acc / 320.0).abs() < 1e-12);
    assert!(matches!(mse(&a, &ImageGrid::zeros(16, 19)), Err(Error::Dimension(_))));
}

#[test]
fn psnr_relations() {
    assert!((psnr_from_mse(0.01) - 20.0).abs() < 1e-12);
    let a = random_grid(10, 10, 3);
    assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
    for seed in 0..20 {
        let b = random_grid(10, 10, 100 + seed);
        let m = mse(&a, &b).unwrap();
        assert!((psnr(&a, &b).unwrap() - 10.0 * (1.0 / m).log10()).abs() < 1e-10);
    }
    let seq: Vec<f64> = (1..50).map(|k| psnr_from_mse(k as f64 * 0.01)).collect();
    assert!(seq.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn ssim_properties() {
    let a = random_grid(16, 16, 4);
    let b = random_grid(16, 16, 5);
    assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    assert!((ssim(&a, &b).unwrap() - ssim(&b, &a).unwrap()).abs() < 1e-12);
    assert!(ssim(&a, &b).unwrap().abs() <= 1.0);
    assert!(ssim(&ImageGrid::zeros(7, 9), &ImageGrid::zeros(7, 9)).is_err());
}

#[test]
fn ssim_of_inverted_halves_is_negative() {
    // A binary half-black / half-white image against its complement.
    let x = ImageGrid::from_fn(16, 16, |_, c| if c < 8 { 0.0 } else { 1.0 });
    let y = x.map(|v| 1.0 - v);
    assert!(ssim(&x, &y).unwrap() < 0.0);
}

/// One window of the SSIM formula evaluated literally.
fn ssim_window(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let va = a.iter().map(|v| (v - ma).powi(2)).sum::<f64>() / n;
    let vb = b.iter().map(|v| (v - mb).powi(2)).sum::<f64>() / n;
    let cov = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n;
    let (c1, c2) = (1e-4, 9e-4);
    ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2))
}

#[test]
fn ssim_on_single_window_matches_formula() {
    let a = random_grid(8, 8, 6);
    let b = random_grid(8, 8, 7);
    assert!((ssim(&a, &b).unwrap() - ssim_window(a.data(), b.data())).abs() < 1e-12);
}

#[test]
fn entropy_values() {
    assert_eq!(entropy(&ImageGrid::zeros(8, 8)), 0.0);
    let half = ImageGrid::from_fn(8, 8, |r, _| if r < 4 { 0.7 } else { 0.0 });
    assert!((entropy(&half) - 1.0).abs() < 1e-12);
    let quarter = ImageGrid::from_fn(8, 8, |r, _| if r < 2 { 1.0 } else { 0.0 });
    let closed = -(0.25f64 * 0.25f64.log2() + 0.75 * 0.75f64.log2());
    assert!((entropy(&quarter) - closed).abs() < 1e-12);
    // The 256-bin histogram of a 0/1 map has the same two occupied bins.
    assert!((histogram_entropy(&quarter) * 8.0 - closed).abs() < 1e-12);
    assert!((binary_entropy(0.3) - binary_entropy(0.7)).abs() < 1e-15);
}

#[test]
fn report_bundles_metrics() {
    let a = random_grid(12, 12, 8);
    let b = random_grid(12, 12, 9);
    let r = MetricsReport::compute("img", "sobel", &a, &b).unwrap();
    assert_eq!(r.image_id, "img");
    assert_eq!(r.mse, mse(&a, &b).unwrap());
    assert_eq!(r.ssim, ssim(&a, &b).unwrap());
    assert_eq!(r.entropy, entropy(&a));
}

proptest! {
    #[test]
    fn entropy_in_unit_interval(p in 0.0f64..=1.0) {
        let e = binary_entropy(p);
        prop_assert!((0.0..=1.0 + 1e-15).contains(&e));
        prop_assert!((e - binary_entropy(1.0 - p)).abs() < 1e-12);
    }

    #[test]
    fn ssim_bounded(s1 in 0u64..1000, s2 in 0u64..1000) {
        let a = random_grid(10, 10, s1);
        let b = random_grid(10, 10, s2 + 5000);
        let v = ssim(&a, &b).unwrap();
        prop_assert!(v.abs() <= 1.0 + 1e-12);
        prop_assert!(histogram_entropy(&a) <= 1.0);
    }
}
