//! Lanczos approximation of `e^{-iτH} v` for Hermitian `H`.
//!
//! Each substep builds an `m`-dimensional Krylov basis once, diagonalizes the
//! small tridiagonal projection, and then picks the largest step `τ` whose a
//! posteriori error estimate `β_m |e_mᵀ e^{-iτT} e_1|` stays under tolerance.

#[allow(unused_imports)] // float methods come from std when it is linked
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::sparse::{LinearOperator, Scaled};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy)]
pub struct KrylovOptions {
    /// Maximum Krylov dimension per substep.
    pub max_dim: usize,
    /// Local error tolerance per substep, relative to the vector norm.
    pub tol: f64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { max_dim: 30, tol: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KrylovStats {
    pub substeps: usize,
    pub matvecs: usize,
    /// Sum of the local error estimates over all substeps.
    pub error_estimate: f64,
}

impl KrylovStats {
    pub fn absorb(&mut self, other: KrylovStats) {
        self.substeps += other.substeps;
        self.matvecs += other.matvecs;
        self.error_estimate += other.error_estimate;
    }
}

struct Projection {
    basis: Vec<Vec<C64>>,
    eigvals: Vec<f64>,
    /// Row-major `m × m`, eigenvectors in columns.
    eigvecs: Vec<f64>,
    /// Residual coupling to the next Krylov vector; zero on exact breakdown.
    beta_next: f64,
}

impl Projection {
    fn dim(&self) -> usize {
        self.eigvals.len()
    }

    /// Coefficients of `e^{-iτT} e_1` in the Krylov basis.
    fn coefficients(&self, tau: f64) -> Vec<C64> {
        let m = self.dim();
        let phases: Vec<C64> = (0..m)
            .map(|k| C64::from_polar(self.eigvecs[k], -tau * self.eigvals[k]))
            .collect();
        (0..m)
            .map(|i| (0..m).map(|k| phases[k] * self.eigvecs[i * m + k]).sum())
            .collect()
    }

    fn error_estimate(&self, coefs: &[C64]) -> f64 {
        self.beta_next * coefs.last().map_or(0.0, |c| c.norm())
    }
}

fn lanczos<A: LinearOperator + ?Sized>(
    h: &A,
    start: &[C64],
    norm: f64,
    max_dim: usize,
    stats: &mut KrylovStats,
) -> Projection {
    let m_cap = max_dim.min(h.dim()).max(1);
    let inv = 1.0 / norm;
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m_cap + 1);
    basis.push(start.iter().map(|&z| z * inv).collect());
    let mut alpha: Vec<f64> = Vec::with_capacity(m_cap);
    let mut beta: Vec<f64> = Vec::with_capacity(m_cap);
    let mut w = vec![ZERO; h.dim()];
    let mut scale: f64 = 0.0;
    let mut beta_next = 0.0;
    for j in 0..m_cap {
        h.apply_into(&basis[j], &mut w);
        stats.matvecs += 1;
        let a: f64 = basis[j].iter().zip(&w).map(|(q, x)| (q.conj() * x).re).sum();
        for (x, q) in w.iter_mut().zip(&basis[j]) {
            *x -= q * a;
        }
        if j > 0 {
            let b = beta[j - 1];
            for (x, q) in w.iter_mut().zip(&basis[j - 1]) {
                *x -= q * b;
            }
        }
        alpha.push(a);
        let b = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        scale = scale.max(a.abs()).max(b);
        beta_next = b;
        if j + 1 == m_cap || b <= 1e-14 * scale.max(1e-300) {
            break;
        }
        beta.push(b);
        let binv = 1.0 / b;
        basis.push(w.iter().map(|&z| z * binv).collect());
    }
    let m = alpha.len();
    basis.truncate(m);
    let mut t = vec![0.0; m * m];
    for i in 0..m {
        t[i * m + i] = alpha[i];
        if i + 1 < m {
            t[i * m + i + 1] = beta[i];
            t[(i + 1) * m + i] = beta[i];
        }
    }
    let (eigvals, eigvecs) = symmetric_eigen(&mut t, m, true);
    // Full basis or exact invariant subspace: nothing is lost.
    if m == h.dim() || beta_next <= 1e-14 * scale.max(1e-300) {
        beta_next = 0.0;
    }
    Projection { basis, eigvals, eigvecs, beta_next }
}

/// Computes `e^{-i t H} v` for Hermitian `H`; `t` may be negative.
pub fn expm_hermitian<A: LinearOperator + ?Sized>(
    h: &A,
    v: &[C64],
    t: f64,
    opts: KrylovOptions,
) -> Result<(Vec<C64>, KrylovStats)> {
    let mut stats = KrylovStats::default();
    let mut w = v.to_vec();
    if t == 0.0 {
        return Ok((w, stats));
    }
    let direction = t.signum();
    let mut remaining = t.abs();
    let mut tau_guess = remaining;
    while remaining > 0.0 {
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        let proj = lanczos(h, &w, norm, opts.max_dim, &mut stats);
        let mut tau = tau_guess.min(remaining);
        let mut coefs;
        let mut halvings = 0;
        loop {
            coefs = proj.coefficients(direction * tau);
            let err = proj.error_estimate(&coefs);
            if err <= opts.tol {
                stats.error_estimate += err * norm;
                break;
            }
            tau *= 0.5;
            halvings += 1;
            if halvings > 60 {
                return Err(Error::KrylovBreakdown);
            }
        }
        let mut next = vec![ZERO; w.len()];
        for (q, &c) in proj.basis.iter().zip(&coefs) {
            let c = c * norm;
            for (n, &x) in next.iter_mut().zip(q) {
                *n += x * c;
            }
        }
        w = next;
        stats.substeps += 1;
        // Guard against float residue leaving a sliver of time.
        remaining = if remaining - tau <= 1e-15 * t.abs() { 0.0 } else { remaining - tau };
        tau_guess = if halvings == 0 { 2.0 * tau } else { tau };
    }
    Ok((w, stats))
}

/// Computes `e^{t G} v` for anti-Hermitian `G` by running Lanczos on `iG`.
pub fn expm_anti_hermitian<A: LinearOperator + ?Sized>(
    g: &A,
    v: &[C64],
    t: f64,
    opts: KrylovOptions,
) -> Result<(Vec<C64>, KrylovStats)> {
    let herm = Scaled { op: g, factor: C64::new(0.0, 1.0) };
    expm_hermitian(&herm, v, t, opts)
}
