use edbsw_core::spline::*;
use num_rational::Rational64 as Q;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Piecewise closed form of the cubic B-spline in exact arithmetic. This is
/// deliberately a different formulation from the truncated-power sum used by
/// the library.
fn beta_exact(t: Q) -> Q {
    let a = if t < Q::from_integer(0) { -t } else { t };
    if a < Q::from_integer(1) {
        Q::new(2, 3) - a * a + a * a * a / Q::from_integer(2)
    } else if a < Q::from_integer(2) {
        let u = Q::from_integer(2) - a;
        u * u * u / Q::from_integer(6)
    } else {
        Q::from_integer(0)
    }
}

fn special_exact(t: Q) -> Q {
    let s = Q::new(1, 16);
    let e = Q::new(1, 8);
    (Q::from_integer(451) * beta_exact(t) - Q::from_integer(256) * (beta_exact(t - s) + beta_exact(t + s))
        + Q::from_integer(32) * (beta_exact(t - e) + beta_exact(t + e)))
        / Q::from_integer(3)
}

fn to_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

#[test]
fn bspline_matches_rational_oracle_on_dyadic_grid() {
    for p in -160..=160 {
        let t = Q::new(p, 64);
        let got = eval_bspline3(to_f64(t)).unwrap();
        let want = to_f64(beta_exact(t));
        assert!((got - want).abs() < 1e-15, "t={t}: {got} vs {want}");
    }
    assert_eq!(to_f64(beta_exact(Q::from_integer(0))), 2.0 / 3.0);
    assert!((eval_bspline3(0.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn bspline_support_and_domain() {
    assert_eq!(eval_bspline3(-3.0).unwrap(), 0.0);
    assert_eq!(eval_bspline3(2.0).unwrap(), 0.0);
    assert_eq!(eval_bspline3(0.37).unwrap(), eval_bspline3(-0.37).unwrap());
    assert!(eval_bspline3(f64::NAN).is_err());
    assert!(eval_bspline3(f64::INFINITY).is_err());
}

#[test]
fn bspline_integrates_to_one() {
    let n = 4000;
    let h = 4.0 / n as f64;
    let mut s = 0.0;
    for i in 0..=n {
        let t = -2.0 + h * i as f64;
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        s += w * eval_bspline3(t).unwrap();
    }
    assert!((s * h / 3.0 - 1.0).abs() < 1e-12);
}

#[test]
fn bspline_partition_of_unity() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let t: f64 = rng.random_range(-10.0..10.0);
        let s: f64 = (-15..=15).map(|k| eval_bspline3(t - k as f64).unwrap()).sum();
        assert!((s - 1.0).abs() < 1e-12, "t={t}: {s}");
    }
}

#[test]
fn special_spline_matches_rational_oracle() {
    for p in -150..=150 {
        let t = Q::new(p, 64);
        let got = eval_special_spline(to_f64(t)).unwrap();
        let want = to_f64(special_exact(t));
        assert!((got - want).abs() < 1e-12, "t={t}: {got} vs {want}");
    }
}

#[test]
fn special_spline_interpolates_integers_exactly_in_rationals() {
    assert_eq!(special_exact(Q::from_integer(0)), Q::from_integer(1));
    for k in [1, 2, 3] {
        assert_eq!(special_exact(Q::from_integer(k)), Q::from_integer(0));
        assert_eq!(special_exact(Q::from_integer(-k)), Q::from_integer(0));
    }
    assert!((eval_special_spline(0.0).unwrap() - 1.0).abs() < 1e-13);
    assert!(eval_special_spline(1.0).unwrap().abs() < 1e-13);
}

#[test]
fn special_spline_support_and_symmetry() {
    assert_eq!(eval_special_spline(3.0).unwrap(), 0.0);
    assert_eq!(eval_special_spline(-2.125).unwrap(), 0.0);
    assert_eq!(eval_special_spline(0.9).unwrap(), eval_special_spline(-0.9).unwrap());
    assert!(eval_special_spline(f64::NAN).is_err());
}

/// Trapezoidal Fourier integral of the exact spline samples.
fn ft_by_quadrature(omega: f64) -> f64 {
    let n = 1 << 14;
    let a = SPECIAL_SUPPORT;
    let h = 2.0 * a / n as f64;
    (0..=n)
        .map(|i| {
            let t = -a + h * i as f64;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            w * eval_special_spline(t).unwrap() * (omega * t).cos()
        })
        .sum::<f64>()
        * h
}

#[test]
fn spline_transform_matches_quadrature() {
    for omega in [0.0, 0.4, 1.3, 2.9, 6.0] {
        let got = eval_spline_ft(omega).unwrap();
        let want = ft_by_quadrature(omega);
        assert!((got - want).abs() < 1e-6, "ω={omega}: {got} vs {want}");
    }
}

#[test]
fn spline_transform_special_points() {
    assert_eq!(eval_spline_ft(0.0).unwrap(), 1.0);
    assert!(eval_spline_ft(2.0 * std::f64::consts::PI).unwrap().abs() < 1e-15);
    // Tiny arguments take the series branch and stay continuous with it.
    let a = eval_spline_ft(1e-9).unwrap();
    let b = eval_spline_ft(2e-8).unwrap();
    assert!((a - 1.0).abs() < 1e-15 && (b - 1.0).abs() < 1e-14);
    assert!(eval_spline_ft(f64::NAN).is_err());
}

fn factorial(n: u64) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[test]
fn p_coefficients_against_factorials() {
    assert_eq!(p_coefficients(4).unwrap(), vec![1.0, 4.0, 10.0, 20.0]);
    for l in 1..=9u32 {
        let c = p_coefficients(l).unwrap();
        assert_eq!(c.len(), l as usize);
        for (n, v) in c.iter().enumerate() {
            let l = l as u64;
            let n = n as u64;
            let want = factorial(l - 1 + n) / (factorial(l - 1) * factorial(n));
            assert_eq!(*v, want);
        }
    }
    assert!(p_coefficients(0).is_err());
    assert!(eval_p(0.2, 0).is_err());
    assert_eq!(eval_p(0.77, 1).unwrap(), 1.0);
}

#[test]
fn bezout_identity() {
    for l in 1..=8u32 {
        for y in [0.0f64, 0.1, 0.3, 0.5, 0.9, 1.0] {
            let lhs = (1.0 - y).powi(l as i32) * eval_p(y, l).unwrap() + y.powi(l as i32) * eval_p(1.0 - y, l).unwrap();
            assert!((lhs - 1.0).abs() < 1e-12, "L={l} y={y}: {lhs}");
        }
    }
}

#[test]
fn h_is_two_scale_ratio() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let w: f64 = rng.random_range(-3.0..3.0);
        let ratio = eval_spline_ft(2.0 * w).unwrap() / eval_spline_ft(w).unwrap();
        assert!((eval_h(w).unwrap() - ratio).abs() < 1e-10, "ω={w}");
    }
    assert!((eval_h(0.7).unwrap() - eval_spline_ft(1.4).unwrap() / eval_spline_ft(0.7).unwrap()).abs() < 1e-10);
}

#[test]
fn response_endpoints() {
    use std::f64::consts::PI;
    assert!((eval_h(0.0).unwrap() - 1.0).abs() < 1e-15);
    assert!(eval_h(PI).unwrap().abs() < 1e-15);
    for ns in 1..=5 {
        assert!((eval_hstar(0.0, ns).unwrap() - 1.0).abs() < 1e-15);
        assert!(eval_hstar(PI, ns).unwrap().abs() < 1e-15);
    }
    assert!(eval_hstar(0.3, 0).is_err());
    for l in 1..=7 {
        assert_eq!(eval_p(0.0, l).unwrap(), 1.0);
    }
    assert!((eval_q(0.0).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn pr_identity_before_truncation() {
    use std::f64::consts::PI;
    for l in 4..=7u32 {
        let n_star = l - N_SYNTHESIS;
        let mut worst: f64 = 0.0;
        for j in 0..4096 {
            let w = 2.0 * PI * j as f64 / 4096.0;
            let v = eval_h(w).unwrap() * eval_hstar(w, n_star).unwrap()
                + eval_h(w + PI).unwrap() * eval_hstar(w + PI, n_star).unwrap();
            worst = worst.max((v - 1.0).abs());
        }
        assert!(worst < 1e-8, "L={l}: {worst}");
    }
}

#[test]
fn complex_responses_are_consistent() {
    use std::f64::consts::PI;
    let h = FrequencyResponse::new(ResponseKind::H, 5).unwrap();
    let hs = FrequencyResponse::new(ResponseKind::HStar, 5).unwrap();
    let g = FrequencyResponse::new(ResponseKind::G, 5).unwrap();
    let gs = FrequencyResponse::new(ResponseKind::GStar, 5).unwrap();
    assert_eq!(h.l(), 5);
    assert_eq!(hs.n_star, 3);
    let e = |w: f64| -num_complex::Complex64::from_polar(1.0, -w);
    for j in 0..256 {
        let w = 2.0 * PI * j as f64 / 256.0;
        let want_g = e(w) * eval_hstar(w + PI, 3).unwrap();
        let want_gs = e(w) * eval_h(w + PI).unwrap();
        assert!((g.eval(w).unwrap() - want_g).norm() < 1e-15);
        assert!((gs.eval(w).unwrap() - want_gs).norm() < 1e-15);
        assert_eq!(hs.eval(w).unwrap().im, 0.0);
        // The analytic alias term reduces to e^{iω}·H(ω+π)·(H(ω+2π) − H(ω)),
        // which vanishes only where H repeats with period 2π.
        let alias =
            h.eval(w).unwrap() * gs.eval(w).unwrap().conj() + h.eval(w + PI).unwrap() * gs.eval(w + PI).unwrap().conj();
        let reduced = num_complex::Complex64::from_polar(1.0, w)
            * eval_h(w + PI).unwrap()
            * (eval_h(w + 2.0 * PI).unwrap() - eval_h(w).unwrap());
        assert!((alias - reduced).norm() < 1e-12);
    }
    assert!(FrequencyResponse::new(ResponseKind::P, 2).is_err());
    let p = FrequencyResponse::new(ResponseKind::P, 4).unwrap();
    assert_eq!(p.eval(0.0).unwrap().re, 1.0);
    let q = FrequencyResponse::new(ResponseKind::Q, 4).unwrap();
    let qs = FrequencyResponse::new(ResponseKind::QStar, 4).unwrap();
    let w = 1.1;
    let prod = q.eval(w).unwrap() * qs.eval(w).unwrap();
    assert!((prod - p.eval(w).unwrap()).norm() < 1e-12);
    let s = FrequencyResponse::new(ResponseKind::SHat, 4).unwrap();
    assert_eq!(s.eval(0.0).unwrap().re, 1.0);
}

/// Slope of `log|f|` against `log|ω − π|` from two points approaching π.
fn zero_order(f: impl Fn(f64) -> f64) -> f64 {
    use std::f64::consts::PI;
    let (e1, e2) = (1e-2, 5e-3);
    let (a, b) = (f(PI - e1).abs(), f(PI - e2).abs());
    (a.ln() - b.ln()) / (e1.ln() - e2.ln())
}

#[test]
fn vanishing_moments_at_pi() {
    assert!(zero_order(|w| eval_h(w).unwrap()) >= 4.0 - 0.1);
    for ns in 2..=5u32 {
        let k = zero_order(|w| eval_hstar(w, ns).unwrap());
        assert!(k >= 2.0 * ns as f64 - 0.1, "N*={ns}: {k}");
    }
}

#[test]
fn h_repeats_with_period_32pi_not_2pi() {
    use std::f64::consts::PI;
    let w = 0.4;
    assert!((eval_h(w + 32.0 * PI).unwrap() - eval_h(w).unwrap()).abs() < 1e-10);
    assert!((eval_h(w + 2.0 * PI).unwrap() - eval_h(w).unwrap()).abs() > 1e-6);
}

#[test]
fn denominator_scan_finds_minimum_three() {
    let (min, at) = scan_denominator(1 << 16);
    assert!((min - 3.0).abs() < 1e-9, "{min} at {at}");
    assert!(at.abs() < 1e-9);
    assert_eq!(q_denominator(0.0), 3.0);
    assert_eq!(binomial(6, 2), 15.0);
}

proptest! {
    #[test]
    fn splines_are_even(t in -3.0f64..3.0) {
        prop_assert_eq!(eval_bspline3(t).unwrap(), eval_bspline3(-t).unwrap());
        prop_assert_eq!(eval_special_spline(t).unwrap(), eval_special_spline(-t).unwrap());
    }

    #[test]
    fn bspline_nonnegative_and_bounded(t in -5.0f64..5.0) {
        let v = eval_bspline3(t).unwrap();
        prop_assert!((0.0..=2.0 / 3.0 + 1e-15).contains(&v));
    }

    #[test]
    fn outside_support_is_zero(t in 2.125f64..50.0) {
        prop_assert_eq!(eval_special_spline(t).unwrap(), 0.0);
        prop_assert_eq!(eval_bspline3(t).unwrap(), 0.0);
    }

    #[test]
    fn h_is_real_and_bounded(w in -10.0f64..10.0) {
        let v = eval_h(w).unwrap();
        prop_assert!(v.is_finite());
    }
}
