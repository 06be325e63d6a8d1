//! Array geometry, crack configurations and search grids.

use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A point or direction in the plane. Serialised as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at angle `theta`.
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c, s)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Counter-clockwise rotation by `phi`.
    pub fn rotated(self, phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Self::new(x, y)
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

const FULL_CIRCLE_TOL: f64 = 1e-12;

/// Ordered unit directions sampled uniformly in angle on the arc `[alpha, beta]`.
///
/// For a limited aperture the angles are `α + (β−α)(n−1)/(N−1)`, endpoints
/// included. When the arc is the full circle the endpoint `β` coincides with
/// `α`, so it is dropped and the `N` angles are `α + 2π(n−1)/N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionSet {
    alpha: f64,
    beta: f64,
    full_view: bool,
    angles: Vec<f64>,
    directions: Vec<Vec2>,
}

impl DirectionSet {
    pub fn count(&self) -> usize {
        self.directions.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// True when the aperture covers the whole circle.
    pub fn is_full_view(&self) -> bool {
        self.full_view
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn directions(&self) -> &[Vec2] {
        &self.directions
    }

    /// `N` equi-spaced directions on the whole circle.
    pub fn full_view(count: usize) -> Result<Self> {
        make_direction_set(count, 0.0, TAU)
    }
}

/// Builds the equi-angular sampling of `[alpha, beta]` with `count` directions.
pub fn make_direction_set(count: usize, alpha: f64, beta: f64) -> Result<DirectionSet> {
    if count < 2 {
        return invalid(format!("direction set needs at least 2 directions, got {count}"));
    }
    if !alpha.is_finite() || !beta.is_finite() {
        return invalid("arc endpoints must be finite");
    }
    if beta <= alpha {
        return invalid(format!("empty arc: beta ({beta}) must exceed alpha ({alpha})"));
    }
    let width = beta - alpha;
    if width > TAU + FULL_CIRCLE_TOL {
        return invalid(format!("arc width {width} exceeds 2π"));
    }
    let full_view = (width - TAU).abs() <= FULL_CIRCLE_TOL;
    let denom = if full_view { count } else { count - 1 } as f64;
    let angles: Vec<f64> = (0..count).map(|n| alpha + width * n as f64 / denom).collect();
    let directions = angles.iter().map(|&t| Vec2::from_angle(t)).collect();
    Ok(DirectionSet { alpha, beta, full_view, angles, directions })
}

/// The backscattering observation set `x̂_m = −θ_m`.
///
/// Vectors are negated exactly, so applying this twice restores the input
/// bit for bit. Angles shift by `π`, wrapped back by `2π` once `α` leaves
/// `[0, 2π)`.
pub fn observation_directions(d: &DirectionSet) -> DirectionSet {
    let mut shift = PI;
    if d.alpha + shift >= TAU {
        shift -= TAU;
    }
    DirectionSet {
        alpha: d.alpha + shift,
        beta: d.beta + shift,
        full_view: d.full_view,
        angles: d.angles.iter().map(|a| a + shift).collect(),
        directions: d.directions.iter().map(|&v| -v).collect(),
    }
}

/// One straight crack. The orientation is carried for configuration fidelity
/// only; the small-crack far-field model depends on the centre alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Crack {
    pub center: Vec2,
    #[serde(default)]
    pub orientation: f64,
}

/// Cracks sharing a common half-length `ℓ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrackScene {
    cracks: Vec<Crack>,
    half_length: f64,
}

impl CrackScene {
    /// Validates `0 < ℓ < 2`, at least one crack, finite and pairwise distinct centres.
    pub fn new(cracks: Vec<Crack>, half_length: f64) -> Result<Self> {
        if !(half_length > 0.0 && half_length < 2.0) {
            return invalid(format!("half-length must lie in (0, 2), got {half_length}"));
        }
        if cracks.is_empty() {
            return invalid("scene has no cracks");
        }
        for (i, c) in cracks.iter().enumerate() {
            if !c.center.is_finite() || !c.orientation.is_finite() {
                return invalid(format!("crack {i} has a non-finite center or orientation"));
            }
            if let Some(j) = cracks[..i].iter().position(|o| o.center == c.center) {
                return invalid(format!("cracks {j} and {i} share the center {:?}", c.center));
            }
        }
        Ok(Self { cracks, half_length })
    }

    pub fn cracks(&self) -> &[Crack] {
        &self.cracks
    }

    pub fn centers(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.cracks.iter().map(|c| c.center)
    }

    pub fn len(&self) -> usize {
        self.cracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cracks.is_empty()
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    /// Sub-scene holding only crack `index`.
    pub fn single(&self, index: usize) -> Result<Self> {
        match self.cracks.get(index) {
            Some(&c) => Self::new(vec![c], self.half_length),
            None => invalid(format!("crack index {index} out of range ({} cracks)", self.len())),
        }
    }

    /// Every centre shifted by `t`.
    pub fn translated(&self, t: Vec2) -> Self {
        let cracks = self.cracks.iter().map(|c| Crack { center: c.center + t, ..*c }).collect();
        Self { cracks, half_length: self.half_length }
    }

    /// Smallest distance from `x` to any crack centre.
    pub fn min_distance(&self, x: Vec2) -> f64 {
        self.centers().map(|z| z.distance(x)).fold(f64::INFINITY, f64::min)
    }
}

/// The three-crack reference configuration: `ℓ = 0.05` and centres
///
/// - `(−0.6, −0.2)`,
/// - `(0.4, 0.35)` rotated by `π/4`,
/// - `(0.25, −0.6)` rotated by `7π/6`.
///
/// Orientations are the direction of each segment after rotation.
pub fn three_crack_scene() -> CrackScene {
    let diag = FRAC_PI_4;
    let cracks = vec![
        Crack { center: Vec2::new(-0.6, -0.2), orientation: 0.0 },
        Crack { center: Vec2::new(0.4, 0.35).rotated(FRAC_PI_4), orientation: diag + FRAC_PI_4 },
        Crack { center: Vec2::new(0.25, -0.6).rotated(7.0 * PI / 6.0), orientation: diag + 7.0 * PI / 6.0 },
    ];
    CrackScene::new(cracks, 0.05).expect("reference scene is valid")
}

/// Uniform rectangular lattice of search points, row-major with `x` fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl SearchGrid {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return invalid(format!("grid needs at least 2 points per axis, got {nx}x{ny}"));
        }
        if ![x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite()) {
            return invalid("grid bounds must be finite");
        }
        if x_min >= x_max || y_min >= y_max {
            return invalid(format!("grid bounds are empty: x [{x_min}, {x_max}], y [{y_min}, {y_max}]"));
        }
        Ok(Self { x_min, x_max, y_min, y_max, nx, ny })
    }

    /// 101×101 points over `[−1, 1]²` (spacing 0.02).
    pub fn default_square() -> Self {
        Self::new(-1.0, 1.0, -1.0, 1.0, 101, 101).expect("valid default grid")
    }

    /// Square grid of `n×n` points over `[−half_width, half_width]²`.
    pub fn square(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, -half_width, half_width, n, n)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn point(&self, ix: usize, iy: usize) -> Vec2 {
        Vec2::new(self.x_min + self.dx() * ix as f64, self.y_min + self.dy() * iy as f64)
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    /// `(ix, iy)` of a row-major index.
    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.nx, index / self.nx)
    }

    pub fn points(&self) -> impl Iterator<Item = Vec2> + '_ {
        (0..self.ny).flat_map(move |iy| (0..self.nx).map(move |ix| self.point(ix, iy)))
    }

    /// Row-major index of the lattice point closest to `p` (clamped to the grid).
    pub fn nearest_index(&self, p: Vec2) -> usize {
        let fx = ((p.x - self.x_min) / self.dx()).round().clamp(0.0, (self.nx - 1) as f64) as usize;
        let fy = ((p.y - self.y_min) / self.dy()).round().clamp(0.0, (self.ny - 1) as f64) as usize;
        self.index(fx, fy)
    }
}
