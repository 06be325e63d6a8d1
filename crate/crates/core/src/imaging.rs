//! Steering vectors and subspace-migration imaging functionals.
//!
//! With the signal subspace `{U_s, V_s}` of the MSR matrix at wavenumber `k`,
//! the single-frequency functional is
//!
//! `I(x; k) = |Σ_s ⟨W(x;k), U_s⟩ ⟨W(x;k), V̄_s⟩|`, `⟨a, b⟩ = ā·b`,
//!
//! and the multi-frequency one averages the inner sum over `k_1..k_F` before
//! taking the modulus. Every map is divided by its maximum.

use num_complex::Complex64;
use serde::Serialize;

use crate::bessel::{j0, mf_closed_form};
use crate::error::{invalid, Error, Result};
use crate::scene::{CrackScene, DirectionSet, SearchGrid, Vec2};
use crate::spectral::SingularSystem;

/// `W(x; k)` with components `exp(i k θ_n·x) / √N` (unit Euclidean norm).
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub point: Vec2,
    pub wavenumber: f64,
    pub values: Vec<Complex64>,
}

pub fn steering_vector(x: Vec2, d: &DirectionSet, k: f64) -> Result<SteeringVector> {
    if !(k > 0.0) || !k.is_finite() {
        return invalid(format!("wavenumber must be positive, got {k}"));
    }
    if !x.is_finite() {
        return invalid("steering point must be finite");
    }
    Ok(SteeringVector { point: x, wavenumber: k, values: steering_values(x, d, k) })
}

fn steering_values(x: Vec2, d: &DirectionSet, k: f64) -> Vec<Complex64> {
    let scale = 1.0 / (d.count() as f64).sqrt();
    d.directions().iter().map(|t| Complex64::from_polar(scale, k * t.dot(x))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapKind {
    SingleFrequency,
    MultiFrequency,
    AnalyticSingle,
    AnalyticMulti,
}

/// Non-negative values on a [`SearchGrid`], max-normalised.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImagingMap {
    pub grid: SearchGrid,
    pub values: Vec<f64>,
    pub wavenumbers_used: Vec<f64>,
    pub kind: MapKind,
}

impl ImagingMap {
    /// Builds a map and divides it by its maximum (an all-zero map stays zero).
    pub fn normalized(grid: SearchGrid, mut values: Vec<f64>, wavenumbers_used: Vec<f64>, kind: MapKind) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        let max = values.iter().copied().fold(0.0, f64::max);
        if max > 0.0 {
            values.iter_mut().for_each(|v| *v /= max);
        }
        Self { grid, values, wavenumbers_used, kind }
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[self.grid.index(ix, iy)]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Row-major index of the largest value (first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }
}

/// Inner sum `Σ_s ⟨W, U_s⟩⟨W, V̄_s⟩` over the truncated subspace.
fn subspace_response(w: &[Complex64], sys: &SingularSystem, s_count: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (u, v) in sys.left_vectors().iter().zip(sys.right_vectors()).take(s_count) {
        let wu: Complex64 = w.iter().zip(u).map(|(a, b)| a.conj() * b).sum();
        // ⟨W, V̄⟩ = conj(Σ W_i V_i)
        let wv: Complex64 = w.iter().zip(v).map(|(a, b)| a * b).sum();
        acc += wu * wv.conj();
    }
    acc
}

fn check_system(sys: &SingularSystem, d: &DirectionSet) -> Result<usize> {
    let s =
        sys.truncation_index().ok_or_else(|| Error::InvalidState("singular system has no truncation index".into()))?;
    if sys.dim() != d.count() {
        return invalid(format!("system dimension {} does not match {} directions", sys.dim(), d.count()));
    }
    if sys.singular_values().first().copied().unwrap_or(0.0) == 0.0 {
        return Err(Error::EmptySignal("singular system carries no signal".into()));
    }
    Ok(s)
}

/// Single-frequency subspace migration at the system's wavenumber.
pub fn image_single(sys: &SingularSystem, d: &DirectionSet, grid: &SearchGrid) -> Result<ImagingMap> {
    let s = check_system(sys, d)?;
    let k = sys.wavenumber();
    let values = grid.points().map(|x| subspace_response(&steering_values(x, d, k), sys, s).norm()).collect();
    Ok(ImagingMap::normalized(*grid, values, vec![k], MapKind::SingleFrequency))
}

/// Multi-frequency subspace migration: `(1/F) |Σ_f Σ_s ⟨W,U_s⟩⟨W,V̄_s⟩|`.
pub fn image_multi(systems: &[SingularSystem], d: &DirectionSet, grid: &SearchGrid) -> Result<ImagingMap> {
    if systems.len() < 2 {
        return invalid(format!("multi-frequency imaging needs at least 2 frequencies, got {}", systems.len()));
    }
    let counts = systems.iter().map(|s| check_system(s, d)).collect::<Result<Vec<_>>>()?;
    let f = systems.len() as f64;
    let values = grid
        .points()
        .map(|x| {
            let total: Complex64 = systems
                .iter()
                .zip(&counts)
                .map(|(sys, &s)| subspace_response(&steering_values(x, d, sys.wavenumber()), sys, s))
                .sum();
            total.norm() / f
        })
        .collect();
    let ks = systems.iter().map(|s| s.wavenumber()).collect();
    Ok(ImagingMap::normalized(*grid, values, ks, MapKind::MultiFrequency))
}

/// Bessel prediction `Σ_s J_0(k|x − z_s|)²` of the single-frequency map.
pub fn analytic_single(scene: &CrackScene, grid: &SearchGrid, k: f64) -> Result<ImagingMap> {
    if !(k > 0.0) || !k.is_finite() {
        return invalid(format!("wavenumber must be positive, got {k}"));
    }
    let values = grid.points().map(|x| scene.centers().map(|z| j0(k * x.distance(z)).powi(2)).sum()).collect();
    Ok(ImagingMap::normalized(*grid, values, vec![k], MapKind::AnalyticSingle))
}

/// Closed-form prediction `|Σ_s mf(k1, kF, |x − z_s|)|` of the multi-frequency map.
pub fn analytic_multi(scene: &CrackScene, grid: &SearchGrid, k1: f64, kf: f64) -> Result<ImagingMap> {
    mf_closed_form(k1, kf, 0.0)?;
    let values = grid
        .points()
        .map(|x| {
            scene.centers().map(|z| crate::bessel::mf_closed_form_unchecked(k1, kf, x.distance(z))).sum::<f64>().abs()
        })
        .collect();
    Ok(ImagingMap::normalized(*grid, values, vec![k1, kf], MapKind::AnalyticMulti))
}
