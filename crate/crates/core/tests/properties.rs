mod common;

use std::f64::consts::{FRAC_PI_4, TAU};

use num_complex::Complex64;
use proptest::prelude::*;
use submig_core::bessel::{bessel_j, j0_squared_antiderivative_check};
use submig_core::spectral::inner;
use submig_core::*;

fn scene_from(points: &[(f64, f64)]) -> Option<CrackScene> {
    let cracks = points.iter().map(|&(x, y)| Crack { center: Vec2::new(x, y), orientation: 0.0 }).collect();
    CrackScene::new(cracks, 0.05).ok()
}

fn point() -> impl Strategy<Value = (f64, f64)> {
    (-1.0..1.0f64, -1.0..1.0f64)
}

fn truncated(scene: &CrackScene, d: &DirectionSet, k: f64) -> SingularSystem {
    let mut sys = svd(&assemble_msr(scene, d, k).unwrap()).unwrap();
    sys.set_truncation_index(scene.len()).unwrap();
    sys
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn bessel_bounded(n in 0i32..=20, x in 0.0..1e4f64) {
        prop_assert!(bessel_j(n, x).unwrap().abs() <= 1.0);
    }

    #[test]
    fn bessel_matches_oracle(n in 0u32..=20, x in 0.0..500.0f64) {
        let got = bessel_j(n as i32, x).unwrap();
        prop_assert!((got - common::bessel_trapezoid(n, x)).abs() < 1e-12);
    }

    #[test]
    fn direction_angles_follow_formula(n in 2usize..40, alpha in 0.0..3.0f64, width in 0.1..3.0f64) {
        let beta = alpha + width;
        let d = make_direction_set(n, alpha, beta).unwrap();
        for (i, (&a, v)) in d.angles().iter().zip(d.directions()).enumerate() {
            prop_assert_eq!(a, alpha + (beta - alpha) * i as f64 / (n - 1) as f64);
            prop_assert!((v.norm() - 1.0).abs() < 1e-14);
        }
        prop_assert!(d.angles().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn observation_is_involution(n in 2usize..30, alpha in 0.0..6.0f64, width in 0.1..6.2f64) {
        let d = make_direction_set(n, alpha, alpha + width).unwrap();
        let back = observation_directions(&observation_directions(&d));
        for (a, b) in back.directions().iter().zip(d.directions()) {
            prop_assert!(a.distance(*b) < 1e-15);
        }
    }

    #[test]
    fn msr_is_linear_in_cracks(a in prop::collection::vec(point(), 1..4), b in prop::collection::vec(point(), 1..4), k in 5.0..40.0f64) {
        let all: Vec<_> = a.iter().chain(&b).copied().collect();
        let (Some(sa), Some(sb), Some(sab)) = (scene_from(&a), scene_from(&b), scene_from(&all)) else {
            return Ok(());
        };
        let d = make_direction_set(9, 0.3, 2.8).unwrap();
        let ka = assemble_msr(&sa, &d, k).unwrap();
        let kb = assemble_msr(&sb, &d, k).unwrap();
        let kab = assemble_msr(&sab, &d, k).unwrap();
        let scale = kab.frobenius_norm().max(1.0);
        for ((x, y), z) in ka.entries().iter().zip(kb.entries()).zip(kab.entries()) {
            prop_assert!((x + y - z).norm() < 1e-13 * scale);
        }
    }

    #[test]
    fn msr_translation_covariance(pts in prop::collection::vec(point(), 1..4), t in point(), k in 5.0..40.0f64) {
        let Some(scene) = scene_from(&pts) else { return Ok(()) };
        let t = Vec2::new(t.0, t.1);
        let d = make_direction_set(8, FRAC_PI_4, 3.0 * FRAC_PI_4).unwrap();
        let base = assemble_msr(&scene, &d, k).unwrap();
        let moved = assemble_msr(&scene.translated(t), &d, k).unwrap();
        let dirs = d.directions();
        for m in 0..8 {
            for n in 0..8 {
                let phase = Complex64::from_polar(1.0, k * (dirs[n] + dirs[m]).dot(t));
                prop_assert!((base.get(m, n) * phase - moved.get(m, n)).norm() < 1e-12);
            }
        }
        // σ lists agree after the shift
        let s0 = svd(&base).unwrap();
        let s1 = svd(&moved).unwrap();
        let top = s0.singular_values()[0];
        for (a, b) in s0.singular_values().iter().zip(s1.singular_values()) {
            prop_assert!((a - b).abs() < 1e-10 * top);
        }
    }

    #[test]
    fn map_is_scale_invariant(re in -3.0..3.0f64, im in -3.0..3.0f64) {
        prop_assume!(re.hypot(im) > 1e-3);
        let scene = three_crack_scene();
        let d = make_direction_set(12, FRAC_PI_4, 3.0 * FRAC_PI_4).unwrap();
        let grid = SearchGrid::square(1.0, 21).unwrap();
        let k = assemble_msr(&scene, &d, 25.0).unwrap();
        let image = |m: &forward::MsrMatrix| {
            let mut sys = svd(m).unwrap();
            sys.set_truncation_index(3).unwrap();
            image_single(&sys, &d, &grid).unwrap()
        };
        let a = image(&k);
        let b = image(&k.scaled(Complex64::new(re, im)));
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn map_is_invariant_under_common_pair_phase(g in prop::collection::vec(0.0..TAU, 3)) {
        let scene = three_crack_scene();
        let d = make_direction_set(12, FRAC_PI_4, 3.0 * FRAC_PI_4).unwrap();
        let grid = SearchGrid::square(1.0, 21).unwrap();
        let sys = truncated(&scene, &d, 31.4);
        let mut rotated = sys.clone();
        for (s, &gamma) in g.iter().enumerate() {
            let p = Complex64::from_polar(1.0, gamma);
            rotated.rotate_pair(s, p, p);
        }
        let a = image_single(&sys, &d, &grid).unwrap();
        let b = image_single(&rotated, &d, &grid).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn single_pair_map_ignores_opposite_phases(gamma in 0.0..TAU) {
        let scene = three_crack_scene().single(1).unwrap();
        let d = make_direction_set(12, FRAC_PI_4, 3.0 * FRAC_PI_4).unwrap();
        let grid = SearchGrid::square(1.0, 21).unwrap();
        let sys = truncated(&scene, &d, 20.0);
        let mut rotated = sys.clone();
        rotated.rotate_pair(0, Complex64::from_polar(1.0, gamma), Complex64::from_polar(1.0, -gamma));
        let a = image_single(&sys, &d, &grid).unwrap();
        let b = image_single(&rotated, &d, &grid).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn antiderivative_identity_holds(a in 0.1..150.0f64, len in 0.0..50.0f64) {
        let b = (a + len).min(200.0);
        prop_assert!(j0_squared_antiderivative_check(a, b).unwrap() < 1e-7);
    }
}

#[test]
fn signal_subspace_contains_crack_steering_vectors() {
    let scene = three_crack_scene();
    let d = make_direction_set(12, FRAC_PI_4, 3.0 * FRAC_PI_4).unwrap();
    for k in [TAU / 0.6, TAU / 0.4, TAU / 0.2] {
        let sys = svd(&assemble_msr(&scene, &d, k).unwrap()).unwrap();
        for z in scene.centers() {
            let w = steering_vector(z, &d, k).unwrap().values;
            let captured: f64 = sys.left_vectors()[..3].iter().map(|u| inner(u, &w).norm_sqr()).sum();
            let residual = (1.0 - captured).max(0.0).sqrt();
            assert!(residual < 1e-6, "k={k}: residual {residual}");
        }
    }
}

#[test]
fn noise_raises_the_floor_but_keeps_peaks() {
    let scene = three_crack_scene();
    let d = make_direction_set(12, FRAC_PI_4, 3.0 * FRAC_PI_4).unwrap();
    let grid = SearchGrid::default_square();
    let k = TAU / 0.2;
    let noisy = add_noise(&assemble_msr(&scene, &d, k).unwrap(), 0.01, 7).unwrap();
    let mut sys = svd(&noisy).unwrap();
    let s = sys.singular_values();
    assert!(s[3] / s[0] > 1e-3, "σ4/σ1 = {}", s[3] / s[0]);
    assert_eq!(sys.truncate_by_threshold(1e-2).unwrap(), 3);
    let map = image_single(&sys, &d, &grid).unwrap();
    let q = verify::quality_metrics(&map, &scene, 0.2).unwrap();
    assert!(q.max_localization_error() <= 0.1, "{q:?}");
}

#[test]
fn dropped_j1_band_term_is_measured_not_assumed() {
    let (k1, kf) = (TAU / 0.6, TAU / 0.2);
    let (boundary, j1_sq) = verify::band_integral_terms(k1, kf, 1.0);
    // oracle: trapezoid Bessel values and a plain composite Simpson rule in k
    let energy = |k: f64| k * (common::bessel_trapezoid(0, k).powi(2) + common::bessel_trapezoid(1, k).powi(2));
    let steps = 4000;
    let h = (kf - k1) / steps as f64;
    let simpson: f64 = (0..=steps)
        .map(|i| {
            let w = if i == 0 || i == steps {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * common::bessel_trapezoid(1, k1 + h * i as f64).powi(2)
        })
        .sum::<f64>()
        * h
        / 3.0;
    assert!((boundary - (energy(kf) - energy(k1))).abs() < 1e-12);
    assert!((j1_sq - simpson).abs() < 1e-9);
    // the J_1² band integral dominates the boundary terms at r = 1
    let ratio = j1_sq / boundary.abs();
    assert!((ratio - 14.3478818).abs() < 1e-5, "ratio {ratio}");
}

#[test]
fn arc_remainder_constant_bounds_intermediate_kr() {
    let (a, b) = (FRAC_PI_4, 3.0 * FRAC_PI_4);
    let sweep = [10.0, 20.0, 80.0, 160.0, 320.0, 640.0];
    let c = sweep.iter().map(|&kr| verify::arc_remainder(kr, a, b, 64).unwrap() * f64::sqrt(kr)).fold(0.0, f64::max);
    let at_50 = verify::arc_remainder(50.0, a, b, 64).unwrap();
    assert!(at_50 <= c / 50f64.sqrt(), "{at_50} vs C={c}");
}
