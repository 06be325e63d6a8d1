//! Synthetic far-field data from the small-crack asymptotic formula.
//!
//! For cracks of common half-length `ℓ` centred at `z_s`, the far field in
//! direction `x̂` for incidence `θ` is modelled as
//!
//! `u∞(x̂, θ; k) = −2π / ln(ℓ/2) · Σ_s exp(i k (θ − x̂)·z_s)`.
//!
//! The `O(1/|ln ℓ|²)` remainder is not modelled; [`add_noise`] stands in for
//! model error.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::scene::{observation_directions, CrackScene, DirectionSet, Vec2};

/// Square multi-static response matrix at one wavenumber.
///
/// Entry `(m, n)` is the far field observed in direction `m` for incidence
/// `n`. Stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MsrMatrix {
    wavenumber: f64,
    dim: usize,
    entries: Vec<Complex64>,
}

impl MsrMatrix {
    /// Wraps row-major `entries` of a `dim × dim` matrix.
    pub fn from_entries(wavenumber: f64, dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return invalid(format!("expected {} entries for a {dim}x{dim} matrix, got {}", dim * dim, entries.len()));
        }
        if dim == 0 {
            return invalid("MSR matrix must be non-empty");
        }
        Ok(Self { wavenumber, dim, entries })
    }

    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.entries[m * self.dim + n]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.entries.chunks(self.dim)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖K − Kᵀ‖_F / ‖K‖_F`.
    pub fn symmetry_residual(&self) -> f64 {
        let mut acc = 0.0;
        for m in 0..self.dim {
            for n in 0..self.dim {
                acc += (self.get(m, n) - self.get(n, m)).norm_sqr();
            }
        }
        acc.sqrt() / self.frobenius_norm()
    }

    /// Every entry multiplied by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        Self { entries: self.entries.iter().map(|z| z * c).collect(), ..self.clone() }
    }
}

/// Prefactor `−2π / ln(ℓ/2)` of the small-crack far field.
pub fn crack_prefactor(half_length: f64) -> Result<f64> {
    if !(half_length > 0.0 && half_length < 2.0) {
        return invalid(format!("half-length must lie in (0, 2), got {half_length}"));
    }
    Ok(-TAU / (half_length / 2.0).ln())
}

/// Far-field sample for one incident/observation pair.
pub fn far_field_entry(scene: &CrackScene, incident: Vec2, observation: Vec2, k: f64) -> Result<Complex64> {
    check_wavenumber(k)?;
    let c = crack_prefactor(scene.half_length())?;
    Ok(entry_unchecked(scene, incident - observation, k) * c)
}

fn entry_unchecked(scene: &CrackScene, delta: Vec2, k: f64) -> Complex64 {
    scene.centers().map(|z| Complex64::from_polar(1.0, k * delta.dot(z))).sum()
}

fn check_wavenumber(k: f64) -> Result<()> {
    if !(k > 0.0) || !k.is_finite() {
        return invalid(format!("wavenumber must be positive and finite, got {k}"));
    }
    Ok(())
}

/// Backscattering MSR matrix: observation `m` is `−θ_m`.
pub fn assemble_msr(scene: &CrackScene, d: &DirectionSet, k: f64) -> Result<MsrMatrix> {
    assemble_msr_with_observations(scene, d, &observation_directions(d), k)
}

/// MSR matrix with an independent observation array of the same size.
pub fn assemble_msr_with_observations(
    scene: &CrackScene,
    incident: &DirectionSet,
    observation: &DirectionSet,
    k: f64,
) -> Result<MsrMatrix> {
    check_wavenumber(k)?;
    let c = crack_prefactor(scene.half_length())?;
    let dim = incident.count();
    if observation.count() != dim {
        return invalid(format!("observation count {} differs from incident count {dim}", observation.count()));
    }
    let mut entries = Vec::with_capacity(dim * dim);
    for &obs in observation.directions() {
        for &inc in incident.directions() {
            entries.push(entry_unchecked(scene, inc - obs, k) * c);
        }
    }
    MsrMatrix::from_entries(k, dim, entries)
}

/// Adds i.i.d. circular complex Gaussian noise with `E|η|² = (level·‖K‖_F/N)²`
/// per entry, drawn from a ChaCha8 stream seeded by `seed`.
pub fn add_noise(msr: &MsrMatrix, relative_level: f64, seed: u64) -> Result<MsrMatrix> {
    if !(relative_level >= 0.0) || !relative_level.is_finite() {
        return invalid(format!("noise level must be finite and non-negative, got {relative_level}"));
    }
    if relative_level == 0.0 {
        return Ok(msr.clone());
    }
    let sigma = relative_level * msr.frobenius_norm() / msr.dim as f64;
    let normal = Normal::new(0.0, sigma / 2f64.sqrt()).map_err(|e| crate::Error::InvalidArgument(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = msr
        .entries
        .iter()
        .map(|&z| {
            let re = normal.sample(&mut rng);
            let im = normal.sample(&mut rng);
            z + Complex64::new(re, im)
        })
        .collect();
    Ok(MsrMatrix { entries, ..msr.clone() })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_4;

    use super::*;
    use crate::scene::{make_direction_set, three_crack_scene, Crack};

    fn single(center: Vec2) -> CrackScene {
        CrackScene::new(vec![Crack { center, orientation: 0.0 }], 0.05).unwrap()
    }

    #[test]
    fn prefactor_value() {
        // ln(0.025) = ln(1/40) = −(3 ln 2 + ln 5)
        let ln40 = 3.0 * 2f64.ln() + 5f64.ln();
        let want = TAU / ln40;
        assert!((crack_prefactor(0.05).unwrap() - want).abs() < 1e-15);
        assert!((want - 1.70327).abs() < 1e-5);
        assert!(crack_prefactor(2.0).is_err());
        assert!(crack_prefactor(0.0).is_err());
    }

    #[test]
    fn entry_at_origin_is_prefactor() {
        let s = single(Vec2::new(0.0, 0.0));
        let c = crack_prefactor(0.05).unwrap();
        let v = far_field_entry(&s, Vec2::from_angle(0.3), Vec2::from_angle(2.0), 17.0).unwrap();
        assert!((v - Complex64::new(c, 0.0)).norm() < 1e-15);
        // zero phase when incident equals observation
        let s = single(Vec2::new(0.3, -0.8));
        let v = far_field_entry(&s, Vec2::from_angle(1.1), Vec2::from_angle(1.1), 40.0).unwrap();
        assert!((v - Complex64::new(c, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn symmetric_pair_with_orthogonal_probe() {
        let z = Vec2::new(0.3, 0.4);
        let s =
            CrackScene::new(vec![Crack { center: z, orientation: 0.0 }, Crack { center: -z, orientation: 0.0 }], 0.05)
                .unwrap();
        // incident − observation ∝ (−0.4, 0.3) ⟂ z
        let inc = Vec2::new(-0.4, 0.3) * 0.5;
        let obs = -inc;
        let v = far_field_entry(&s, inc, obs, 9.0).unwrap();
        let c = crack_prefactor(0.05).unwrap();
        assert!((v - Complex64::new(2.0 * c, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn constant_matrix_for_crack_at_origin() {
        let d = make_direction_set(7, 0.2, 2.0).unwrap();
        let k = assemble_msr(&single(Vec2::new(0.0, 0.0)), &d, 5.0).unwrap();
        let c = crack_prefactor(0.05).unwrap();
        assert!(k.entries().iter().all(|z| (z - c).norm() < 1e-15));
    }

    #[test]
    fn reference_scene_is_symmetric() {
        let d = make_direction_set(12, FRAC_PI_4, 3.0 * FRAC_PI_4).unwrap();
        let k = assemble_msr(&three_crack_scene(), &d, TAU / 0.2).unwrap();
        assert_eq!(k.dim(), 12);
        assert!(k.symmetry_residual() < 1e-12);
    }

    #[test]
    fn rejects_bad_wavenumber() {
        let d = make_direction_set(3, 0.0, 1.0).unwrap();
        assert!(assemble_msr(&three_crack_scene(), &d, 0.0).is_err());
        assert!(assemble_msr(&three_crack_scene(), &d, f64::NAN).is_err());
    }

    #[test]
    fn noise_contract() {
        let d = make_direction_set(12, FRAC_PI_4, 3.0 * FRAC_PI_4).unwrap();
        let k = assemble_msr(&three_crack_scene(), &d, 20.0).unwrap();
        assert_eq!(add_noise(&k, 0.0, 9).unwrap(), k);
        let a = add_noise(&k, 0.01, 42).unwrap();
        let b = add_noise(&k, 0.01, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, add_noise(&k, 0.01, 43).unwrap());
        assert!(add_noise(&k, -0.1, 1).is_err());

        // empirical per-entry variance close to (level ‖K‖/N)²
        let big = add_noise(&k, 0.5, 7).unwrap();
        let sigma = 0.5 * k.frobenius_norm() / 12.0;
        let var: f64 = big.entries().iter().zip(k.entries()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / 144.0;
        assert!((var / (sigma * sigma) - 1.0).abs() < 0.3, "variance ratio {}", var / (sigma * sigma));
    }

    #[test]
    fn observation_count_must_match() {
        let a = make_direction_set(4, 0.0, 1.0).unwrap();
        let b = make_direction_set(5, 0.0, 1.0).unwrap();
        assert!(assemble_msr_with_observations(&three_crack_scene(), &a, &b, 3.0).is_err());
    }
}
