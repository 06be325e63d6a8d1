//! Complex SVD of the MSR matrix and signal-subspace selection.
//!
//! The decomposition is a one-sided (Hestenes) Jacobi iteration: plane
//! rotations orthogonalise the columns of `K V` until `K V = U Σ`. It keeps
//! small singular values accurate relative to `‖K‖`, which the rank test on
//! noise-free data depends on. Columns that collapse to exactly zero get
//! their left vectors completed by Gram–Schmidt on the standard basis.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::forward::MsrMatrix;

const MAX_SWEEPS: usize = 80;

/// Singular values (non-increasing) with left and right singular vectors,
/// `K = Σ_s σ_s U_s V_s*`.
///
/// Each pair `(U_s, V_s)` is rotated by a common unit scalar so that the
/// largest-magnitude entry of `U_s` is real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSystem {
    wavenumber: f64,
    singular_values: Vec<f64>,
    left: Vec<Vec<Complex64>>,
    right: Vec<Vec<Complex64>>,
    truncation_index: Option<usize>,
}

impl SingularSystem {
    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    pub fn dim(&self) -> usize {
        self.singular_values.len()
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn left_vectors(&self) -> &[Vec<Complex64>] {
        &self.left
    }

    pub fn right_vectors(&self) -> &[Vec<Complex64>] {
        &self.right
    }

    pub fn truncation_index(&self) -> Option<usize> {
        self.truncation_index
    }

    pub fn set_truncation_index(&mut self, s: usize) -> Result<()> {
        if s == 0 || s > self.dim() {
            return invalid(format!("truncation index {s} outside 1..={}", self.dim()));
        }
        self.truncation_index = Some(s);
        Ok(())
    }

    /// Runs [`estimate_signal_dimension`] and stores the result.
    pub fn truncate_by_threshold(&mut self, tau: f64) -> Result<usize> {
        let s = estimate_signal_dimension(self, tau)?;
        self.truncation_index = Some(s);
        Ok(s)
    }

    /// Multiplies pair `s` by `(u_phase, v_phase)`. Only a common phase keeps
    /// the decomposition valid; unequal phases are for invariance tests.
    pub fn rotate_pair(&mut self, s: usize, u_phase: Complex64, v_phase: Complex64) {
        self.left[s].iter_mut().for_each(|z| *z *= u_phase);
        self.right[s].iter_mut().for_each(|z| *z *= v_phase);
    }

    /// `‖K − Σ σ_s U_s V_s*‖_F / ‖K‖_F` over the full system.
    pub fn reconstruction_residual(&self, msr: &MsrMatrix) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut z = Complex64::new(0.0, 0.0);
                for s in 0..n {
                    z += self.left[s][i] * self.right[s][j].conj() * self.singular_values[s];
                }
                acc += (msr.get(i, j) - z).norm_sqr();
            }
        }
        let norm = msr.frobenius_norm();
        if norm == 0.0 {
            acc.sqrt()
        } else {
            acc.sqrt() / norm
        }
    }

    /// Largest `|⟨X_i, X_j⟩ − δ_ij|` over both the left and the right vectors.
    pub fn orthonormality_residual(&self) -> f64 {
        gram_residual(&self.left).max(gram_residual(&self.right))
    }
}

fn gram_residual(vs: &[Vec<Complex64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in vs.iter().enumerate() {
        for (j, b) in vs.iter().enumerate() {
            let g = inner(a, b);
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - target).norm());
        }
    }
    worst
}

/// `⟨a, b⟩ = ā·b`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Full SVD of a square MSR matrix.
pub fn svd(msr: &MsrMatrix) -> Result<SingularSystem> {
    let n = msr.dim();
    if msr.entries().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return invalid("MSR matrix has non-finite entries");
    }
    // columns of K and of V
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| (0..n).map(|i| msr.get(i, j)).collect()).collect();
    let mut v: Vec<Vec<Complex64>> =
        (0..n).map(|j| (0..n).map(|i| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect()).collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = norm_sqr(&cols[p]);
                let beta = norm_sqr(&cols[q]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = inner(&cols[p], &cols[q]);
                let g = gamma.norm();
                if g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut cols, p, q, c, s, phase);
                rotate_columns(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            break;
        }
    }

    let sigma: Vec<f64> = cols.iter().map(|c| norm_sqr(c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));

    let mut singular_values = Vec::with_capacity(n);
    let mut left: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    for &j in &order {
        let s = sigma[j];
        let u = if s > 0.0 { cols[j].iter().map(|z| z / s).collect() } else { complete_basis(&left, n) };
        singular_values.push(s);
        left.push(u);
        right.push(v[j].clone());
    }

    for (u, w) in left.iter_mut().zip(right.iter_mut()) {
        let pivot = u.iter().copied().reduce(|a, b| if b.norm() > a.norm() { b } else { a }).unwrap_or_default();
        if pivot.norm() > 0.0 {
            let phase = pivot.conj() / pivot.norm();
            u.iter_mut().for_each(|z| *z *= phase);
            w.iter_mut().for_each(|z| *z *= phase);
        }
    }

    Ok(SingularSystem { wavenumber: msr.wavenumber(), singular_values, left, right, truncation_index: None })
}

fn rotate_columns(cols: &mut [Vec<Complex64>], p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
    let (head, tail) = cols.split_at_mut(q);
    let (cp, cq) = (&mut head[p], &mut tail[0]);
    for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
        let bq = *b * phase;
        let ap = *a;
        *a = ap * c - bq * s;
        *b = ap * s + bq * c;
    }
}

/// A unit vector orthogonal to every vector in `basis`.
fn complete_basis(basis: &[Vec<Complex64>], n: usize) -> Vec<Complex64> {
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    for e in 0..n {
        let mut w: Vec<Complex64> = (0..n).map(|i| Complex64::new(if i == e { 1.0 } else { 0.0 }, 0.0)).collect();
        for _ in 0..2 {
            for b in basis {
                let proj = inner(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= y * proj);
            }
        }
        let nrm = norm_sqr(&w).sqrt();
        if best.as_ref().is_none_or(|(bn, _)| nrm > *bn) {
            best = Some((nrm, w));
        }
    }
    let (nrm, w) = best.expect("n > 0");
    w.into_iter().map(|z| z / nrm).collect()
}

/// Number of singular values with `σ_s ≥ tau·σ_1`.
pub fn estimate_signal_dimension(sys: &SingularSystem, tau: f64) -> Result<usize> {
    if !(tau > 0.0 && tau < 1.0) {
        return invalid(format!("threshold must lie in (0, 1), got {tau}"));
    }
    let s1 = sys.singular_values.first().copied().unwrap_or(0.0);
    if s1 == 0.0 {
        return Err(Error::EmptySignal("largest singular value is zero".into()));
    }
    Ok(sys.singular_values.iter().filter(|&&s| s >= tau * s1).count())
}
