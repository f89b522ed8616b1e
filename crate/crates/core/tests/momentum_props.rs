use filament_core::gauss::{gcd, RationalTime};
use filament_core::momentum::*;
use filament_core::polygon::build_polygon;
use filament_core::Vec3;
use proptest::prelude::*;
use std::f64::consts::PI;

fn times() -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for q in 1..=24u64 {
        for p in (0..q).filter(|&p| gcd(p, q) == 1) {
            out.push((p, q));
        }
    }
    out
}

#[test]
fn total_momentum_is_invariant() {
    for m in [3u32, 4, 5] {
        let ts = times();
        assert!(ts.len() >= 50);
        let want = total_momentum_third(m);
        for &(p, q) in &ts {
            let v = total_momentum(&build_polygon(RationalTime::new(m, p, q).unwrap()).unwrap());
            assert!(v.x.abs() < 1e-10 && v.y.abs() < 1e-10, "M={m} {p}/{q}: {v:?}");
            assert!((v.z - want).abs() < 1e-10, "M={m} {p}/{q}: {} vs {want}", v.z);
        }
    }
}

#[test]
fn truncated_momentum_invariant_components() {
    for m in [3u32, 4, 5] {
        let want = truncated_momentum_third(m);
        for &(p, q) in &times() {
            let v = momentum_at(m, p, q).unwrap();
            assert!(v.x.abs() < 1e-10, "M={m} {p}/{q}: {v:?}");
            assert!((v.z - want).abs() < 1e-10);
        }
    }
}

#[test]
fn documented_values() {
    let v = total_momentum(&build_polygon(RationalTime::new(3, 0, 1).unwrap()).unwrap());
    assert!((v.z - 2.0 * PI * PI / (3.0 * (PI / 3.0).tan())).abs() < 1e-12);
    assert!((v.z - 3.798_812_505_2).abs() < 1e-9);
    let v4 = total_momentum(&build_polygon(RationalTime::new(4, 0, 1).unwrap()).unwrap());
    assert!((v4.z - PI * PI / 2.0).abs() < 1e-12);
    let v5 = total_momentum(&build_polygon(RationalTime::new(3, 1, 5).unwrap()).unwrap());
    assert!((v5 - v).norm() < 1e-10);

    // one side, one cross product: X(0) ∧ T(0⁺) with the centred triangle's vertex
    let pg = build_polygon(RationalTime::new(3, 0, 1).unwrap()).unwrap();
    let one = pg.vertices[0].cross(&pg.tangents[0]) * (2.0 * PI / 3.0);
    let tr = truncated_momentum(&pg);
    assert!((tr - one).norm() < 1e-14);
    assert!(tr.y.abs() < 1e-14);
}

// X ∧ T is constant on each side; per-side trapezoid rules on 10⁵ points in total.
#[test]
fn exact_sum_equals_dense_quadrature() {
    for q in 1..=12u64 {
        for p in (0..q).filter(|&p| gcd(p, q) == 1) {
            let pg = build_polygon(RationalTime::new(3, p, q).unwrap()).unwrap();
            let n = pg.n_sides;
            let per_side = 100_000 / n;
            let h = pg.side_length / per_side as f64;
            let mut total = Vec3::zeros();
            for j in 0..n {
                let s0 = pg.vertex_s(j);
                let f = |i: usize| {
                    let s = s0 + i as f64 * h;
                    let x = pg.vertices[j] + pg.tangents[j] * (s - s0);
                    x.cross(&pg.tangents[j])
                };
                let inner: Vec3 = (1..per_side).map(f).sum();
                total += (inner + (f(0) + f(per_side)) * 0.5) * h;
            }
            let exact = total_momentum(&pg);
            assert!((total - exact).norm() < 1e-8, "{p}/{q}: {total:?} vs {exact:?}");
        }
    }
}

#[test]
fn series_shape_and_mirror() {
    let s = momentum_series(3, 120).unwrap();
    assert_eq!(s.values.len(), 121);
    assert!((s.values[0] - s.values[120]).abs() < 1e-12);
    assert!(s.first_max_abs < 1e-10 && s.third_max_dev < 1e-10);

    let s = momentum_series(3, 40).unwrap();
    for p in 0..=40 {
        assert!((s.values[40 - p] + s.values[p]).abs() < 1e-9);
    }
}

#[test]
fn sine_round_trip() {
    let q = 120u64;
    let s = momentum_series(3, q).unwrap();
    let coeffs = sine_coefficients(&s, (q as usize - 1) / 2).unwrap();
    let back = sine_synthesis(&coeffs, q);
    let mean = s.values[..q as usize].iter().sum::<f64>() / q as f64;
    for p in 0..q as usize {
        assert!((back[p] + mean - s.values[p]).abs() < 1e-9, "p = {p}");
    }
}

#[test]
fn square_indices_dominate() {
    let s = momentum_series(3, 960).unwrap();
    let c = sine_coefficients(&s, 200).unwrap();
    let d = square_dominance(&c);
    assert!(d.dominant, "{d:?}");
    assert!(d.min_square > 0.0);
}

/// `φ` at `x = a/b` summed from `n_max` down to 1, with `n²a mod 2b` reduced in integers.
fn phi_reversed(a: u64, b: u64, n_max: u64) -> f64 {
    let mut acc = 0.0;
    for n in (1..=n_max).rev() {
        let r = ((n as u128 * n as u128 * a as u128) % (2 * b as u128)) as f64;
        acc += (PI * r / b as f64).sin() / (n * n) as f64;
    }
    acc
}

#[test]
fn riemann_values() {
    assert_eq!(riemann_phi(0.0, 100), 0.0);
    assert!(riemann_phi(1.0, 10_000).abs() < 1e-12);
    assert!((riemann_phi(0.5, 10_000) - phi_reversed(1, 2, 10_000)).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn riemann_matches_reversed_oracle(a in 0u64..1024, k in 0u32..11) {
        // dyadic x = a/2^k is exact in binary
        let b = 1u64 << k;
        let x = a as f64 / b as f64;
        prop_assert!((riemann_phi(x, 10_000) - phi_reversed(a, b, 10_000)).abs() < 1e-12);
    }
}

// The series over p/q ∈ [0, 1] is odd about 1/2, like φ over [0, 2].
#[test]
fn series_resembles_riemann_function() {
    let q = 960u64;
    let s = momentum_series(3, q).unwrap();
    let phi: Vec<f64> = (0..=q).map(|p| -riemann_phi(2.0 * p as f64 / q as f64, 2000)).collect();
    let r = correlation(&s.values, &phi);
    assert!(r > 0.9, "correlation {r}");
}

#[test]
fn invalid_inputs() {
    let s = momentum_series(3, 10).unwrap();
    assert!(sine_coefficients(&s, 5).is_err());
    assert!(series_from_vectors(3, 10, &[Vec3::zeros(); 3]).is_err());
    let bad = vec![Vec3::new(1.0, 0.0, 0.0); 11];
    assert!(series_from_vectors(3, 10, &bad).is_err());
}
