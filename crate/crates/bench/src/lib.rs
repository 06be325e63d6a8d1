//! Benchmark fixtures shared by the criterion targets.

use std::f64::consts::{FRAC_PI_4, PI};

use submig_core::{assemble_msr, make_direction_set, svd, three_crack_scene, CrackScene, DirectionSet, SingularSystem};

pub const LAMBDA_MIN: f64 = 0.2;
pub const LAMBDA_MAX: f64 = 0.6;

pub fn reference_directions(n: usize) -> DirectionSet {
    make_direction_set(n, FRAC_PI_4, 3.0 * FRAC_PI_4).expect("valid arc")
}

pub fn wavenumbers(count: usize) -> Vec<f64> {
    let (lo, hi) = (2.0 * PI / LAMBDA_MAX, 2.0 * PI / LAMBDA_MIN);
    (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1).max(1) as f64).collect()
}

/// Truncated singular systems of the reference scene, one per wavenumber.
pub fn reference_systems(scene: &CrackScene, d: &DirectionSet, ks: &[f64]) -> Vec<SingularSystem> {
    ks.iter()
        .map(|&k| {
            let mut sys = svd(&assemble_msr(scene, d, k).expect("valid scene")).expect("finite matrix");
            sys.set_truncation_index(scene.len()).expect("rank fits");
            sys
        })
        .collect()
}

pub fn reference_scene() -> CrackScene {
    three_crack_scene()
}
