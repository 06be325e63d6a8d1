#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use submig_core::forward::MsrMatrix;

/// `J_n(x) = (1/2π) ∫_0^{2π} cos(nτ − x sin τ) dτ` by the trapezoid rule,
/// independent of the library's series/recurrence code.
pub fn bessel_trapezoid(n: u32, x: f64) -> f64 {
    let m = (x + n as f64 + 20.0 * x.cbrt()) as usize + 64;
    let h = std::f64::consts::TAU / m as f64;
    let s: f64 = (0..m)
        .map(|j| {
            let t = h * j as f64;
            (n as f64 * t - x * t.sin()).cos()
        })
        .sum();
    s / m as f64
}

pub fn random_matrix(seed: u64, n: usize) -> MsrMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries =
        (0..n * n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    MsrMatrix::from_entries(1.0, n, entries).unwrap()
}
