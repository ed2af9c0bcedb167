use edbsw_core::morphology::*;
use edbsw_core::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SCALE: f64 = 255.0;

/// Values on a 1/16 lattice inside `[20, 235]`. With element weights in
/// `[-1, 8]` no erosion or dilation result reaches the clamp range, and all
/// sums stay exactly representable.
fn lattice_grid(h: usize, w: usize, rng: &mut ChaCha8Rng) -> ImageGrid {
    ImageGrid::from_fn(h, w, |_, _| rng.random_range(320..=3760) as f64 / 16.0)
}

fn elements() -> Vec<StructuringElement> {
    let b = builtin_elements(&MorphConfig::default()).unwrap();
    vec![b.lambda1, b.lambda2, b.lambda3, b.lambda_h, StructuringElement::flat()]
}

fn interior_equal(a: &ImageGrid, b: &ImageGrid, margin: usize) -> bool {
    let (h, w) = a.dims();
    (margin..h - margin).all(|r| (margin..w - margin).all(|c| a.get(r, c) == b.get(r, c)))
}

#[test]
fn opening_is_idempotent_and_anti_extensive() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let g = lattice_grid(20, 20, &mut rng);
        for el in elements() {
            let o = open(&g, &el, SCALE);
            let oo = open(&o, &el, SCALE);
            assert!(interior_equal(&o, &oo, 4), "{} not idempotent", el.name);
            for r in 1..19 {
                for c in 1..19 {
                    assert!(o.get(r, c) <= g.get(r, c), "{} not anti-extensive", el.name);
                }
            }
        }
    }
}

#[test]
fn closing_is_idempotent_and_extensive() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..30 {
        let g = lattice_grid(20, 20, &mut rng);
        for el in elements() {
            let cl = close(&g, &el, SCALE);
            assert!(interior_equal(&cl, &close(&cl, &el, SCALE), 4), "{}", el.name);
            for r in 1..19 {
                for c in 1..19 {
                    assert!(cl.get(r, c) >= g.get(r, c), "{}", el.name);
                }
            }
        }
    }
}

#[test]
fn erosion_and_dilation_are_dual() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = lattice_grid(12, 15, &mut rng);
    for el in elements() {
        let lhs = erode_raw(&g.map(|v| -v), &el).map(|v| -v);
        let rhs = dilate_raw(&g, &el.reflected());
        assert_eq!(lhs, rhs, "{}", el.name);
    }
}

#[test]
fn flat_element_is_min_and_max_filter() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = lattice_grid(9, 9, &mut rng);
    let e = erode(&g, &StructuringElement::flat(), SCALE);
    let d = dilate(&g, &StructuringElement::flat(), SCALE);
    for r in 1..8 {
        for c in 1..8 {
            let nb: Vec<f64> =
                (0..3).flat_map(|i| (0..3).map(move |j| (r + i - 1, c + j - 1))).map(|(y, x)| g.get(y, x)).collect();
            assert_eq!(e.get(r, c), nb.iter().cloned().fold(f64::INFINITY, f64::min));
            assert_eq!(d.get(r, c), nb.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        }
    }
}

#[test]
fn operators_are_clamped() {
    let g = ImageGrid::filled(5, 5, 1.0);
    let el = StructuringElement::full("big", [[30.0; 3]; 3]);
    assert!(erode(&g, &el, SCALE).data().iter().all(|&v| v == 0.0));
    let top = ImageGrid::filled(5, 5, 250.0);
    assert!(dilate(&top, &el, SCALE).data().iter().all(|&v| v == SCALE));
}

#[test]
fn element_construction() {
    assert!(StructuringElement::new("empty", [[0.0; 3]; 3], [[false; 3]; 3]).is_err());
    assert!(StructuringElement::new("nan", [[f64::NAN; 3]; 3], [[true; 3]; 3]).is_err());
    let b = builtin_elements(&MorphConfig::default()).unwrap();
    assert_eq!(b.lambda1.max_weight(), 4.0);
    assert_eq!(b.lambda_h.max_weight(), 8.0);
    assert_eq!(b.lambda2.entries().count(), 9);
    let sparse = builtin_elements(&MorphConfig { zero_weight_in_domain: false, ..MorphConfig::default() }).unwrap();
    assert_eq!(sparse.lambda2.entries().count(), 5);
    assert_eq!(sparse.lambda3.entries().count(), 5);
    assert!(builtin_elements(&MorphConfig { mu: 0.0, ..MorphConfig::default() }).is_err());
    assert!(MorphConfig { scale: -1.0, ..MorphConfig::default() }.validate().is_err());
}

#[test]
fn reconstruction_reaches_fixed_point_below_mask() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..20 {
        let mask = ImageGrid::from_fn(16, 16, |_, _| rng.random::<f64>());
        let marker = ImageGrid::from_fn(16, 16, |_, _| rng.random::<f64>());
        let el = if i % 2 == 0 {
            StructuringElement::flat()
        } else {
            builtin_elements(&MorphConfig::default()).unwrap().lambda2
        };
        for step in [ReconstructionStep::Erosion, ReconstructionStep::Dilation] {
            let rec = reconstruct_with(&marker, &mask, &el, step, SCALE).unwrap();
            assert!(rec.iterations <= 16 * 16);
            for (g, m) in rec.grid.data().iter().zip(mask.data()) {
                assert!(g <= m);
            }
            let again = reconstruct_with(&rec.grid, &mask, &el, step, SCALE).unwrap();
            assert!(again.grid.max_abs_diff(&rec.grid).unwrap() < 1e-9);
            assert_eq!(again.iterations, 1);
        }
        let lit = reconstruct(&marker, &mask, &el).unwrap();
        assert!(lit.data().iter().zip(mask.data()).all(|(g, m)| g <= m));
    }
}

#[test]
fn dilation_reconstruction_floods_connected_plateau() {
    // A marker seed inside a plateau of the mask fills the whole plateau.
    let mask = ImageGrid::from_fn(10, 10, |r, c| if (2..8).contains(&r) && (2..8).contains(&c) { 0.8 } else { 0.1 });
    let mut marker = ImageGrid::zeros(10, 10);
    marker.set(5, 5, 0.8);
    let rec =
        reconstruct_with(&marker, &mask, &StructuringElement::flat(), ReconstructionStep::Dilation, SCALE).unwrap();
    assert_eq!(rec.grid, mask);
}

#[test]
fn reconstruction_rejects_mismatched_grids() {
    let a = ImageGrid::zeros(4, 4);
    let b = ImageGrid::zeros(4, 3);
    assert!(reconstruct(&a, &b, &StructuringElement::flat()).is_err());
}

#[test]
fn anti_noise_and_refine_ranges() {
    let cfg = MorphConfig::default();
    let flat = ImageGrid::filled(12, 12, 0.4);
    assert!(anti_noise(&flat, &cfg).unwrap().data().iter().all(|&v| v == 0.0));
    assert!(refine(&flat, &cfg).unwrap().data().iter().all(|&v| v == 0.0));
    let step = ImageGrid::from_fn(12, 12, |_, c| if c < 6 { 0.0 } else { 1.0 });
    for out in [anti_noise(&step, &cfg).unwrap(), refine(&step, &cfg).unwrap()] {
        assert!(out.data().iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(out.max(), 1.0);
        // The response sits on the step, not in the flat far field.
        assert_eq!(out.get(6, 0), 0.0);
        assert!(out.get(6, 5) > 0.0 || out.get(6, 6) > 0.0);
    }
}

#[test]
fn weighted_fuse_limits() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let a = ImageGrid::from_fn(6, 6, |_, _| rng.random::<f64>());
    let b = ImageGrid::from_fn(6, 6, |_, _| rng.random::<f64>());
    assert_eq!(weighted_fuse(&a, &b, 1.0).unwrap(), a);
    assert_eq!(weighted_fuse(&a, &b, 0.0).unwrap(), b);
    let mid = weighted_fuse(&a, &b, 0.25).unwrap();
    assert!((mid.get(2, 3) - (0.25 * a.get(2, 3) + 0.75 * b.get(2, 3))).abs() < 1e-15);
    assert!(weighted_fuse(&a, &b, 1.5).is_err());
    assert!(weighted_fuse(&a, &ImageGrid::zeros(6, 5), 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn erosion_below_dilation(seed in 0u64..10_000, which in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = lattice_grid(8, 8, &mut rng);
        let el = &elements()[which];
        let e = erode(&g, el, SCALE);
        let d = dilate(&g, el, SCALE);
        // With a non-negative origin weight erosion ≤ g ≤ dilation.
        let origin = el.weights[1][1];
        if origin >= 0.0 {
            for ((x, y), z) in e.data().iter().zip(g.data()).zip(d.data()) {
                prop_assert!(x <= y && y <= z);
            }
        }
    }

    #[test]
    fn dilation_is_monotone(seed in 0u64..10_000, bump in 0.0f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = lattice_grid(8, 8, &mut rng);
        let h = g.map(|v| v + bump);
        let el = builtin_elements(&MorphConfig::default()).unwrap().lambda1;
        let (dg, dh) = (dilate(&g, &el, SCALE), dilate(&h, &el, SCALE));
        for (a, b) in dg.data().iter().zip(dh.data()) {
            prop_assert!(a <= b);
        }
    }
}
