//! Integer-order Bessel functions of the first kind and the closed forms
//! built on them.
//!
//! `J_n(x)` is evaluated by its power series for `x < 12` and by Miller's
//! downward recurrence, normalised with the Neumann sum
//! `1 = J_0 + 2 (J_2 + J_4 + ...)`, above. Both branches hold an absolute
//! error below `1e-12` on `[0, 1e4]`.

use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::quadrature::{integrate_adaptive, GaussLegendre, ADAPTIVE_TOL};
use crate::scene::Vec2;

/// Below this argument the power series is used.
pub const SERIES_LIMIT: f64 = 12.0;

const NO_LIMIT: usize = usize::MAX;
static SERIES_TERM_LIMIT: AtomicUsize = AtomicUsize::new(NO_LIMIT);

/// Fault injection for the verification harness: caps the number of power
/// series terms. `None` restores normal evaluation. Process-global.
#[doc(hidden)]
pub fn set_series_term_limit(limit: Option<usize>) {
    SERIES_TERM_LIMIT.store(limit.unwrap_or(NO_LIMIT), Ordering::Relaxed);
}

/// `J_n(x)` for `n >= 0`, finite `x >= 0`.
pub fn bessel_j(n: i32, x: f64) -> Result<f64> {
    if n < 0 {
        return invalid(format!("Bessel order must be non-negative, got {n}"));
    }
    if !x.is_finite() || x < 0.0 {
        return invalid(format!("Bessel argument must be finite and non-negative, got {x}"));
    }
    Ok(jn(n as u32, x))
}

/// Unchecked `J_n(x)`; `x` must be finite and non-negative.
pub fn jn(n: u32, x: f64) -> f64 {
    debug_assert!(x >= 0.0 && x.is_finite());
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x < SERIES_LIMIT {
        power_series(n, x)
    } else {
        miller(n, x)[n as usize]
    }
}

#[inline]
pub fn j0(x: f64) -> f64 {
    jn(0, x)
}

/// `(J_0(x), J_1(x))` from a single evaluation.
pub fn j0_j1(x: f64) -> (f64, f64) {
    if x == 0.0 {
        return (1.0, 0.0);
    }
    if x < SERIES_LIMIT {
        (power_series(0, x), power_series(1, x))
    } else {
        let v = miller(1, x);
        (v[0], v[1])
    }
}

/// `J_0(x), ..., J_nmax(x)`.
pub fn bessel_j_sequence(nmax: u32, x: f64) -> Vec<f64> {
    debug_assert!(x >= 0.0 && x.is_finite());
    if x == 0.0 {
        let mut v = vec![0.0; nmax as usize + 1];
        v[0] = 1.0;
        return v;
    }
    if x < SERIES_LIMIT {
        (0..=nmax).map(|n| power_series(n, x)).collect()
    } else {
        miller(nmax, x)
    }
}

fn power_series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for i in 1..=n {
        term *= half / i as f64;
    }
    if term == 0.0 {
        return 0.0;
    }
    let limit = SERIES_TERM_LIMIT.load(Ordering::Relaxed);
    let q = -half * half;
    let nf = n as f64;
    let mut sum = term;
    let mut k = 0usize;
    while k + 1 < limit {
        k += 1;
        let kf = k as f64;
        term *= q / (kf * (kf + nf));
        sum += term;
        if kf > half && term.abs() <= 0.5 * f64::EPSILON * sum.abs() {
            break;
        }
        if k > 400 {
            break;
        }
    }
    sum
}

/// Miller's algorithm: all orders `0..=nmax` at `x > 0`.
fn miller(nmax: u32, x: f64) -> Vec<f64> {
    const BIG: f64 = 1e250;
    let top = (nmax as f64).max(x);
    let start = (top + 30.0 + 15.0 * top.cbrt()).ceil() as usize;
    let nmax = nmax as usize;
    let mut out = vec![0.0; nmax + 1];

    let mut next = 0.0;
    let mut cur = 1e-30;
    let mut sum = 0.0;
    if start <= nmax {
        out[start] = cur;
    }
    if start & 1 == 0 {
        sum += 2.0 * cur;
    }
    let two_over_x = 2.0 / x;
    for k in (1..=start).rev() {
        let prev = k as f64 * two_over_x * cur - next;
        next = cur;
        cur = prev;
        let idx = k - 1;
        if idx <= nmax {
            out[idx] = cur;
        }
        if idx % 2 == 0 {
            sum += if idx == 0 { cur } else { 2.0 * cur };
        }
        if cur.abs() > BIG {
            let s = 1.0 / BIG;
            cur *= s;
            next *= s;
            sum *= s;
            for v in out.iter_mut().skip(idx) {
                *v *= s;
            }
        }
    }
    for v in &mut out {
        *v /= sum;
    }
    out
}

/// Large-argument form `sqrt(2/(pi x)) cos(x - pi/4)` of `J_0`.
///
/// Used only to measure how fast the leading asymptotic term takes over;
/// the imaging code never calls it.
pub fn bessel_j0_asymptotic(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return invalid(format!("asymptotic form needs a positive finite argument, got {x}"));
    }
    Ok((2.0 / (PI * x)).sqrt() * (x - FRAC_PI_4).cos())
}

/// Gauss–Legendre panel order of [`arc_plane_wave_integral`].
pub const ARC_PANEL_ORDER: usize = 16;

fn check_arc(alpha: f64, beta: f64) -> Result<()> {
    if !alpha.is_finite() || !beta.is_finite() {
        return invalid("arc endpoints must be finite");
    }
    if beta <= alpha {
        return invalid(format!("empty arc: beta ({beta}) must exceed alpha ({alpha})"));
    }
    if beta - alpha > TAU + 1e-12 {
        return invalid(format!("arc [{alpha}, {beta}] is longer than the full circle"));
    }
    Ok(())
}

/// `∫_α^β exp(i k θ̂·s) dθ` with `θ̂ = (cos θ, sin θ)` and `s` the separation
/// `x - z`, by composite Gauss–Legendre quadrature.
///
/// `quadrature_points` is the total node count; it is rounded up to whole
/// panels of [`ARC_PANEL_ORDER`] nodes.
pub fn arc_plane_wave_integral(
    k: f64,
    separation: Vec2,
    alpha: f64,
    beta: f64,
    quadrature_points: usize,
) -> Result<Complex64> {
    if !(k > 0.0) || !k.is_finite() {
        return invalid(format!("wavenumber must be positive, got {k}"));
    }
    check_arc(alpha, beta)?;
    if quadrature_points < 2 {
        return invalid("arc quadrature needs at least two points");
    }
    if separation.norm() == 0.0 {
        return Ok(Complex64::new(beta - alpha, 0.0));
    }
    let rule = GaussLegendre::new(ARC_PANEL_ORDER);
    let panels = quadrature_points.div_ceil(ARC_PANEL_ORDER);
    let ks = separation * k;
    Ok(rule.integrate_composite(alpha, beta, panels, |theta| {
        let (s, c) = theta.sin_cos();
        Complex64::from_polar(1.0, ks.x * c + ks.y * s)
    }))
}

/// Node count that resolves the arc integral to roughly machine precision:
/// one 16-node panel per two radians of phase excursion, plus a margin.
pub fn arc_quadrature_points(kr: f64, alpha: f64, beta: f64) -> usize {
    let panels = (kr * (beta - alpha) / 2.0).ceil() as usize + 4;
    panels * ARC_PANEL_ORDER
}

/// Partial sum of the Jacobi–Anger remainder of the arc integral,
///
/// `4 Σ_{n=1}^{terms} (iⁿ/n) J_n(kr) sin(n(β−α)/2) cos(n((β+α)/2 − φ))`,
///
/// where `s = r (cos φ, sin φ)`. With this phase convention
/// `(β−α) J_0(kr) + remainder` converges to [`arc_plane_wave_integral`].
pub fn jacobi_anger_remainder(k: f64, separation: Vec2, alpha: f64, beta: f64, terms: usize) -> Result<Complex64> {
    if !(k > 0.0) || !k.is_finite() {
        return invalid(format!("wavenumber must be positive, got {k}"));
    }
    check_arc(alpha, beta)?;
    if terms < 1 {
        return invalid("remainder needs at least one term");
    }
    let r = separation.norm();
    if r == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let phi = separation.y.atan2(separation.x);
    let kr = k * r;
    let js = bessel_j_sequence(terms as u32, kr);
    let half_width = 0.5 * (beta - alpha);
    let centre = 0.5 * (beta + alpha) - phi;
    let mut acc = Complex64::new(0.0, 0.0);
    for (n, &j) in js.iter().enumerate().skip(1) {
        let nf = n as f64;
        let coeff = 4.0 / nf * j * (nf * half_width).sin() * (nf * centre).cos();
        acc += i_pow(n) * coeff;
    }
    Ok(acc)
}

fn i_pow(n: usize) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Frequency-averaged closed form
///
/// `kF/(kF−k1) (J_0² + J_1²)(kF r) − k1/(kF−k1) (J_0² + J_1²)(k1 r)`.
pub fn mf_closed_form(k1: f64, kf: f64, r: f64) -> Result<f64> {
    if !(k1 > 0.0) || !kf.is_finite() {
        return invalid(format!("k1 must be positive, got {k1}"));
    }
    if kf <= k1 {
        return invalid(format!("kF ({kf}) must exceed k1 ({k1})"));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return invalid(format!("radius must be finite and non-negative, got {r}"));
    }
    Ok(mf_closed_form_unchecked(k1, kf, r))
}

pub(crate) fn mf_closed_form_unchecked(k1: f64, kf: f64, r: f64) -> f64 {
    let energy = |x: f64| {
        let (a, b) = j0_j1(x);
        a * a + b * b
    };
    let span = kf - k1;
    kf / span * energy(kf * r) - k1 / span * energy(k1 * r)
}

/// Residual of `∫_a^b J_0² = [x (J_0² + J_1²)]_a^b + ∫_a^b J_1²`, with both
/// integrals evaluated by adaptive quadrature.
pub fn j0_squared_antiderivative_check(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !b.is_finite() {
        return invalid(format!("lower limit must be positive, got {a}"));
    }
    if b < a {
        return invalid(format!("upper limit {b} is below lower limit {a}"));
    }
    if a == b {
        return Ok(0.0);
    }
    let j0_sq = integrate_adaptive(a, b, 1.0, ADAPTIVE_TOL, |x| j0(x).powi(2));
    let j1_sq = integrate_adaptive(a, b, 1.0, ADAPTIVE_TOL, |x| jn(1, x).powi(2));
    let bracket = |x: f64| {
        let (p, q) = j0_j1(x);
        x * (p * p + q * q)
    };
    Ok((j0_sq - (bracket(b) - bracket(a)) - j1_sq).abs())
}
