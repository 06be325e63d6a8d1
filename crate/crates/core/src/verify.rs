//! Checks that tie the discrete pipeline to its Bessel-function predictions,
//! plus peak-based image quality metrics.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::bessel::{arc_plane_wave_integral, arc_quadrature_points, j0, j0_j1, jn};
use crate::error::{invalid, Error, Result};
use crate::forward::assemble_msr;
use crate::imaging::{analytic_multi, analytic_single, image_multi, image_single, ImagingMap};
use crate::quadrature::{integrate_adaptive, ADAPTIVE_TOL};
use crate::scene::{CrackScene, DirectionSet, SearchGrid, Vec2};
use crate::spectral::{svd, SingularSystem};

/// Accepted window for the fitted log-log slope of the arc-integral remainder.
pub const DECAY_EXPONENT_WINDOW: (f64, f64) = (-0.65, -0.35);
/// Remainder level that counts as zero on the full circle.
pub const FULL_VIEW_DECAY_TOL: f64 = 1e-8;
/// Oracle comparisons use grid points with `k|x − z| ≥` this value.
pub const EXCLUSION_KR: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecaySample {
    pub kr: f64,
    pub error: f64,
}

/// Remainder of the arc integral against its `J_0` leading term, per `kr`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub samples: Vec<DecaySample>,
    pub fitted_exponent: f64,
    pub full_view: bool,
}

impl DecayReport {
    pub fn max_error(&self) -> f64 {
        self.samples.iter().map(|s| s.error).fold(0.0, f64::max)
    }

    /// Full circle: every error below [`FULL_VIEW_DECAY_TOL`]. Otherwise the
    /// fitted exponent must fall inside [`DECAY_EXPONENT_WINDOW`].
    pub fn passes(&self) -> bool {
        if self.full_view {
            self.max_error() < FULL_VIEW_DECAY_TOL
        } else {
            let (lo, hi) = DECAY_EXPONENT_WINDOW;
            (lo..=hi).contains(&self.fitted_exponent)
        }
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Largest remainder `|∫_α^β e^{i kr cos(θ−φ)} dθ − (β−α) J_0(kr)|` over
/// `directions` equi-spaced separation angles `φ`.
pub fn arc_remainder(kr: f64, alpha: f64, beta: f64, directions: usize) -> Result<f64> {
    let lead = (beta - alpha) * j0(kr);
    let points = arc_quadrature_points(kr, alpha, beta);
    let mut worst: f64 = 0.0;
    for j in 0..directions {
        let phi = TAU * j as f64 / directions as f64;
        let arc = arc_plane_wave_integral(kr, Vec2::from_angle(phi), alpha, beta, points)?;
        worst = worst.max((arc - lead).norm());
    }
    Ok(worst)
}

/// Sweeps `kr` and fits the decay exponent of [`arc_remainder`].
pub fn check_lemma_decay(alpha: f64, beta: f64, kr_values: &[f64], directions: usize) -> Result<DecayReport> {
    if kr_values.len() < 3 {
        return invalid(format!("decay fit needs at least 3 kr samples, got {}", kr_values.len()));
    }
    if kr_values.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("kr samples must be strictly increasing");
    }
    if kr_values[0] < 5.0 {
        return invalid(format!("kr samples must be at least 5, got {}", kr_values[0]));
    }
    if directions == 0 {
        return invalid("need at least one separation direction");
    }
    let samples = kr_values
        .iter()
        .map(|&kr| Ok(DecaySample { kr, error: arc_remainder(kr, alpha, beta, directions)? }))
        .collect::<Result<Vec<_>>>()?;
    let errors: Vec<f64> = samples.iter().map(|s| s.error).collect();
    let fitted_exponent = log_log_slope(kr_values, &errors);
    let full_view = ((beta - alpha) - TAU).abs() < 1e-12;
    Ok(DecayReport { samples, fitted_exponent, full_view })
}

/// Root-mean-square of `a − b` over grid points where `keep(point)` holds.
pub fn masked_rms(a: &ImagingMap, b: &ImagingMap, keep: impl Fn(Vec2) -> bool) -> Result<f64> {
    if a.grid != b.grid {
        return invalid("maps live on different grids");
    }
    let mut acc = 0.0;
    let mut count = 0usize;
    for ((p, x), y) in a.grid.points().zip(&a.values).zip(&b.values) {
        if keep(p) {
            acc += (x - y).powi(2);
            count += 1;
        }
    }
    if count == 0 {
        return invalid("comparison region holds no grid points");
    }
    Ok((acc / count as f64).sqrt())
}

fn single_crack(scene: &CrackScene) -> Result<Vec2> {
    if scene.len() != 1 {
        return invalid(format!("theorem checks need exactly one crack, got {}", scene.len()));
    }
    Ok(scene.cracks()[0].center)
}

fn decompose(scene: &CrackScene, d: &DirectionSet, k: f64) -> Result<SingularSystem> {
    let mut sys = svd(&assemble_msr(scene, d, k)?)?;
    sys.set_truncation_index(scene.len())?;
    Ok(sys)
}

/// Single-frequency pipeline map next to its `J_0²` prediction.
#[derive(Debug, Clone)]
pub struct SingleFrequencyComparison {
    pub pipeline: ImagingMap,
    pub oracle: ImagingMap,
    pub center: Vec2,
    pub wavenumber: f64,
}

impl SingleFrequencyComparison {
    pub fn new(scene: &CrackScene, d: &DirectionSet, k: f64, grid: &SearchGrid) -> Result<Self> {
        let center = single_crack(scene)?;
        let pipeline = image_single(&decompose(scene, d, k)?, d, grid)?;
        let oracle = analytic_single(scene, grid, k)?;
        Ok(Self { pipeline, oracle, center, wavenumber: k })
    }

    /// RMS deviation where `k|x − z| ≥ 20`.
    pub fn far_rms(&self) -> Result<f64> {
        let (z, k) = (self.center, self.wavenumber);
        masked_rms(&self.pipeline, &self.oracle, |p| k * p.distance(z) >= EXCLUSION_KR)
    }

    /// RMS deviation where `k|x − z| < 20`.
    pub fn near_rms(&self) -> Result<f64> {
        let (z, k) = (self.center, self.wavenumber);
        masked_rms(&self.pipeline, &self.oracle, |p| k * p.distance(z) < EXCLUSION_KR)
    }
}

/// Normalised RMS difference between the single-frequency map and
/// `Σ J_0(k|x−z|)²` away from the crack (`k|x − z| ≥ 20`).
pub fn check_theorem_single(scene: &CrackScene, d: &DirectionSet, k: f64, grid: &SearchGrid) -> Result<f64> {
    SingleFrequencyComparison::new(scene, d, k, grid)?.far_rms()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiFrequencyCheck {
    /// RMS difference to the closed form where `k_F |x − z| ≥ 20`.
    pub rms: f64,
    /// `∫ J_1(kr)² dk` over the band divided by the magnitude of the
    /// boundary terms `[k (J_0² + J_1²)(kr)]_{k_1}^{k_F}`, at `r = 1`.
    pub neglected_ratio: f64,
}

/// Magnitudes of the pieces of `∫_{k1}^{kF} J_0(kr)² dk` at radius `r`:
/// `(boundary terms, ∫ J_1(kr)² dk)`.
pub fn band_integral_terms(k1: f64, kf: f64, r: f64) -> (f64, f64) {
    let bracket = |k: f64| {
        let (a, b) = j0_j1(k * r);
        k * (a * a + b * b)
    };
    let boundary = bracket(kf) - bracket(k1);
    let j1_sq = integrate_adaptive(k1, kf, 0.5 / r.max(1e-3), ADAPTIVE_TOL, |k| jn(1, k * r).powi(2));
    (boundary, j1_sq)
}

/// Multi-frequency pipeline map against the closed form, plus the size of
/// the dropped `∫ J_1²` term.
pub fn check_theorem_multi(
    scene: &CrackScene,
    d: &DirectionSet,
    k_list: &[f64],
    grid: &SearchGrid,
) -> Result<MultiFrequencyCheck> {
    let z = single_crack(scene)?;
    if k_list.len() < 5 {
        return invalid(format!("multi-frequency check needs at least 5 frequencies, got {}", k_list.len()));
    }
    let k1 = k_list.iter().copied().fold(f64::INFINITY, f64::min);
    let kf = k_list.iter().copied().fold(0.0, f64::max);
    let systems = k_list.iter().map(|&k| decompose(scene, d, k)).collect::<Result<Vec<_>>>()?;
    let pipeline = image_multi(&systems, d, grid)?;
    let oracle = analytic_multi(scene, grid, k1, kf)?;
    let rms = masked_rms(&pipeline, &oracle, |p| kf * p.distance(z) >= EXCLUSION_KR)?;
    let (boundary, j1_sq) = band_integral_terms(k1, kf, 1.0);
    Ok(MultiFrequencyCheck { rms, neglected_ratio: j1_sq / boundary.abs() })
}

/// Peak detection result for one map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualityMetrics {
    pub peak_positions: Vec<Vec2>,
    pub peak_values: Vec<f64>,
    /// Distance from each true centre to its nearest detected peak.
    pub localization_errors: Vec<f64>,
    /// Weakest detected peak over the strongest local maximum farther than
    /// `λ_min/2` from every true centre; infinite when no such maximum exists
    /// (serialised as `null`).
    pub peak_to_sidelobe: f64,
}

impl QualityMetrics {
    pub fn max_localization_error(&self) -> f64 {
        self.localization_errors.iter().copied().fold(0.0, f64::max)
    }
}

/// Strict local maxima over the 8-neighbourhood, as `(index, value)` sorted
/// by decreasing value.
pub fn local_maxima(map: &ImagingMap) -> Vec<(usize, f64)> {
    let g = &map.grid;
    let mut out = Vec::new();
    for iy in 0..g.ny {
        for ix in 0..g.nx {
            let v = map.at(ix, iy);
            let mut strict = true;
            'nb: for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (jx, jy) = (ix as i64 + dx, iy as i64 + dy);
                    if jx < 0 || jy < 0 || jx >= g.nx as i64 || jy >= g.ny as i64 {
                        continue;
                    }
                    if map.at(jx as usize, jy as usize) >= v {
                        strict = false;
                        break 'nb;
                    }
                }
            }
            if strict {
                out.push((g.index(ix, iy), v));
            }
        }
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    out
}

/// Takes the `S` strongest local maxima (mutual exclusion radius
/// `λ_min/2`), then scores localisation and peak-to-sidelobe ratio.
pub fn quality_metrics(map: &ImagingMap, scene: &CrackScene, lambda_min: f64) -> Result<QualityMetrics> {
    if !(lambda_min > 0.0) {
        return invalid(format!("lambda_min must be positive, got {lambda_min}"));
    }
    if map.max() <= 0.0 {
        return Err(Error::EmptySignal("map is identically zero".into()));
    }
    let maxima = local_maxima(map);
    if maxima.is_empty() {
        return Err(Error::EmptySignal("map has no strict local maximum".into()));
    }
    let radius = 0.5 * lambda_min;
    let g = &map.grid;
    let pos = |i: usize| {
        let (ix, iy) = g.coords(i);
        g.point(ix, iy)
    };

    let mut peaks: Vec<(Vec2, f64)> = Vec::new();
    for &(i, v) in &maxima {
        if peaks.len() == scene.len() {
            break;
        }
        let p = pos(i);
        if peaks.iter().all(|(q, _)| q.distance(p) > radius) {
            peaks.push((p, v));
        }
    }

    let localization_errors =
        scene.centers().map(|z| peaks.iter().map(|(p, _)| p.distance(z)).fold(f64::INFINITY, f64::min)).collect();
    let weakest = peaks.last().map(|&(_, v)| v).unwrap_or(0.0);
    let sidelobe = maxima.iter().find(|&&(i, _)| scene.min_distance(pos(i)) > radius).map(|&(_, v)| v);
    let peak_to_sidelobe = match sidelobe {
        Some(s) if s > 0.0 => weakest / s,
        _ => f64::INFINITY,
    };
    Ok(QualityMetrics {
        peak_positions: peaks.iter().map(|&(p, _)| p).collect(),
        peak_values: peaks.iter().map(|&(_, v)| v).collect(),
        localization_errors,
        peak_to_sidelobe,
    })
}

/// Mean map value over grid points farther than `distance` from every crack.
pub fn far_field_mean(map: &ImagingMap, scene: &CrackScene, distance: f64) -> Result<f64> {
    let mut acc = 0.0;
    let mut count = 0usize;
    for (p, v) in map.grid.points().zip(&map.values) {
        if scene.min_distance(p) > distance {
            acc += v;
            count += 1;
        }
    }
    if count == 0 {
        return invalid(format!("no grid point lies farther than {distance} from every crack"));
    }
    Ok(acc / count as f64)
}
