//! Gauss–Legendre rules, fixed composite and adaptive.

use std::sync::OnceLock;

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Applies the rule on `[a, b]`.
    pub fn integrate<T, F>(&self, a: f64, b: f64, mut f: F) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
        F: FnMut(f64) -> T,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = T::default();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x) * (w * half);
        }
        acc
    }

    /// Composite rule with `panels` equal sub-intervals.
    pub fn integrate_composite<T, F>(&self, a: f64, b: f64, panels: usize, mut f: F) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
        F: FnMut(f64) -> T,
    {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        let mut acc = T::default();
        for p in 0..panels {
            let lo = a + h * p as f64;
            let hi = if p + 1 == panels { b } else { lo + h };
            acc = acc + self.integrate(lo, hi, &mut f);
        }
        acc
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared 15-point rule used by the adaptive integrator.
pub fn gauss_legendre_15() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(15))
}

/// Default absolute tolerance of [`integrate_adaptive`].
pub const ADAPTIVE_TOL: f64 = 1e-10;

const MAX_DEPTH: u32 = 40;

/// Adaptive composite Gauss–Legendre quadrature of a smooth real integrand.
///
/// `[a, b]` is first cut into panels no wider than `max_panel`; each panel is
/// bisected until the one-panel and two-half-panel estimates differ by less
/// than its share of `tol`.
pub fn integrate_adaptive<F>(a: f64, b: f64, max_panel: f64, tol: f64, mut f: F) -> f64
where
    F: FnMut(f64) -> f64,
{
    if b == a {
        return 0.0;
    }
    if b < a {
        return -integrate_adaptive(b, a, max_panel, tol, f);
    }
    let rule = gauss_legendre_15();
    let width = b - a;
    let panels = (width / max_panel).ceil().max(1.0) as usize;
    let h = width / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + h * p as f64;
        let hi = if p + 1 == panels { b } else { lo + h };
        let whole = rule.integrate(lo, hi, &mut f);
        total += refine(rule, lo, hi, whole, tol * (hi - lo) / width, 0, &mut f);
    }
    total
}

fn refine<F>(rule: &GaussLegendre, a: f64, b: f64, whole: f64, tol: f64, depth: u32, f: &mut F) -> f64
where
    F: FnMut(f64) -> f64,
{
    let mid = 0.5 * (a + b);
    let left = rule.integrate(a, mid, &mut *f);
    let right = rule.integrate(mid, b, &mut *f);
    let split = left + right;
    let floor = 4.0 * f64::EPSILON * split.abs();
    if (split - whole).abs() <= tol.max(floor) || depth >= MAX_DEPTH {
        return split;
    }
    refine(rule, a, mid, left, 0.5 * tol, depth + 1, f) + refine(rule, mid, b, right, 0.5 * tol, depth + 1, f)
}
