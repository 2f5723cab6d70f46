//! Dense linear-algebra kernel used by every attack: symmetric
//! eigendecomposition (cyclic Jacobi), SVD, pseudo-inverse, Cholesky and the
//! inverse square root of SPD matrices.

mod eig;
mod factor;
mod matrix;

pub use eig::{sym_eig, sym_eig_with, SymEig};
pub use factor::{
    chol, chol_with, complete_orthonormal, inv_sqrt, inv_sqrt_with, pinv, pinv_with,
    solve_lower_transposed, solve_spd, solve_upper, svd, svd_with, SvdFactors,
};
pub use matrix::Matrix;

/// Numerical thresholds shared by the kernel. Every public factorization has a
/// `_with` variant taking an explicit record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Allowed asymmetry, relative to the largest entry.
    pub symmetry: f64,
    /// A matrix is rank deficient when sigma_min <= rank * sigma_max.
    pub rank: f64,
    /// Jacobi stops once the off-diagonal Frobenius mass is below
    /// `jacobi * ||S||_F`.
    pub jacobi: f64,
    pub max_sweeps: usize,
    /// Eigenvector components below `sign * max|v|` are skipped when fixing
    /// the sign convention.
    pub sign: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            symmetry: 1e-10,
            rank: 1e-10,
            jacobi: 1e-15,
            max_sweeps: 100,
            sign: 1e-10,
        }
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // four accumulators so the loop vectorizes
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// y += s * x
#[inline]
pub fn axpy(s: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

pub fn scaled(s: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| s * v).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}
