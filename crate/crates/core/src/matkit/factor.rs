use super::{dot, norm, sym_eig_with, Matrix, Tolerances};
use crate::error::{Error, Result};

/// X = U Σ V^T with full square U (n×n) and V (m×m).
#[derive(Clone, Debug)]
pub struct SvdFactors {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v: Matrix,
}

impl SvdFactors {
    pub fn sigma_min(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// First `m` columns of U.
    pub fn u_thin(&self) -> Matrix {
        self.u.block(0, self.u.rows(), 0, self.singular_values.len())
    }

    /// n×m matrix with the singular values on its diagonal.
    pub fn sigma_matrix(&self) -> Matrix {
        let n = self.u.rows();
        let m = self.singular_values.len();
        Matrix::from_fn(n, m, |i, j| if i == j { self.singular_values[i] } else { 0.0 })
    }

    pub fn reconstruct(&self) -> Matrix {
        self.u.matmul(&self.sigma_matrix()).matmul(&self.v.transpose())
    }
}

pub fn svd(x: &Matrix) -> Result<SvdFactors> {
    svd_with(x, &Tolerances::default())
}

/// SVD from the eigendecomposition of X^T X; U's leading columns are X V Σ^{-1}
/// re-orthonormalized, the rest a completion of that basis.
pub fn svd_with(x: &Matrix, tol: &Tolerances) -> Result<SvdFactors> {
    let (n, m) = (x.rows(), x.cols());
    if n < m {
        return Err(Error::Dimension(format!(
            "svd needs rows >= cols, got {n}x{m}"
        )));
    }
    if !x.is_finite() {
        return Err(Error::InvalidArgument("non-finite entry in svd input".into()));
    }
    let gram = x.tr_matmul(x).symmetrized();
    let eig = sym_eig_with(&gram, tol)?;
    let singular_values: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let v = eig.vectors;
    let xv = x.matmul(&v);
    let s1 = singular_values.first().copied().unwrap_or(0.0);

    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (k, &s) in singular_values.iter().enumerate() {
        if s > tol.rank * s1 && s > 0.0 {
            let mut c = xv.col(k);
            c.iter_mut().for_each(|v| *v /= s);
            cols.push(c);
        } else {
            break;
        }
    }
    reorthonormalize(&mut cols);
    let leading = cols.len();
    let mut q1 = Matrix::zeros(n, leading);
    for (j, c) in cols.iter().enumerate() {
        q1.set_col(j, c);
    }
    let u = complete_orthonormal(&q1);
    Ok(SvdFactors {
        u,
        singular_values,
        v,
    })
}

/// Two passes of modified Gram-Schmidt, in place. Columns that collapse are
/// dropped.
fn reorthonormalize(cols: &mut Vec<Vec<f64>>) {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    for c in cols.drain(..) {
        let mut w = c;
        let before = norm(&w);
        for _ in 0..2 {
            for q in &out {
                let p = dot(q, &w);
                super::axpy(-p, q, &mut w);
            }
        }
        let nw = norm(&w);
        if nw > 1e-8 * before.max(1e-300) {
            w.iter_mut().for_each(|v| *v /= nw);
            out.push(w);
        }
    }
    *cols = out;
}

/// Extends the orthonormal columns of `q` (n×k) to an n×n orthogonal matrix
/// whose first k columns are those of `q`.
pub fn complete_orthonormal(q: &Matrix) -> Matrix {
    let (n, k) = (q.rows(), q.cols());
    let mut basis: Vec<Vec<f64>> = (0..k).map(|j| q.col(j)).collect();
    // some unit vector always keeps at least 1/sqrt(n) of its norm
    let accept = 0.5 / (n.max(1) as f64).sqrt();
    let mut j = 0;
    while basis.len() < n && j < n {
        let mut w = vec![0.0; n];
        w[j] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let p = dot(b, &w);
                super::axpy(-p, b, &mut w);
            }
        }
        let nw = norm(&w);
        if nw > accept {
            w.iter_mut().for_each(|v| *v /= nw);
            basis.push(w);
        }
        j += 1;
    }
    let mut out = Matrix::zeros(n, n);
    for (c, b) in basis.iter().enumerate().take(n) {
        out.set_col(c, b);
    }
    out
}

pub fn pinv(x: &Matrix) -> Result<Matrix> {
    pinv_with(x, &Tolerances::default())
}

/// Moore-Penrose inverse V Σ^{-1} U_1^T of a full-column-rank matrix.
pub fn pinv_with(x: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    let f = svd_with(x, tol)?;
    let (smin, smax) = (f.sigma_min(), f.sigma_max());
    if smax == 0.0 || smin <= tol.rank * smax {
        return Err(Error::Singular {
            sigma_min: smin,
            sigma_max: smax,
        });
    }
    let (n, m) = (x.rows(), x.cols());
    let mut out = Matrix::zeros(m, n);
    for i in 0..m {
        for k in 0..m {
            let vik = f.v[(i, k)] / f.singular_values[k];
            if vik == 0.0 {
                continue;
            }
            let row = out.row_mut(i);
            for (j, o) in row.iter_mut().enumerate() {
                *o += vik * f.u[(j, k)];
            }
        }
    }
    Ok(out)
}

pub fn chol(s: &Matrix) -> Result<Matrix> {
    chol_with(s, &Tolerances::default())
}

/// Upper-triangular U with S = U^T U.
pub fn chol_with(s: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    check_symmetric(s, tol)?;
    let n = s.rows();
    let mut u = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = s[(j, j)];
        for k in 0..j {
            d -= u[(k, j)] * u[(k, j)];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d });
        }
        let ujj = d.sqrt();
        u[(j, j)] = ujj;
        for i in (j + 1)..n {
            let mut v = s[(j, i)];
            for k in 0..j {
                v -= u[(k, j)] * u[(k, i)];
            }
            u[(j, i)] = v / ujj;
        }
    }
    Ok(u)
}

pub fn inv_sqrt(s: &Matrix) -> Result<Matrix> {
    inv_sqrt_with(s, &Tolerances::default())
}

/// Symmetric R = S^{-1/2}.
pub fn inv_sqrt_with(s: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    check_symmetric(s, tol)?;
    let e = sym_eig_with(s, tol)?;
    let n = e.values.len();
    if n > 0 && e.min() <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            index: n - 1,
            pivot: e.min(),
        });
    }
    Ok(e.map_spectrum(|v| 1.0 / v.sqrt()))
}

/// Solves U x = b for upper-triangular U.
pub fn solve_upper(u: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = u.rows();
    assert_eq!(b.len(), n);
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        let row = u.row(i);
        let s = dot(&row[i + 1..], &x[i + 1..]);
        x[i] = (x[i] - s) / row[i];
    }
    x
}

/// Solves U^T x = b for upper-triangular U.
pub fn solve_lower_transposed(u: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = u.rows();
    assert_eq!(b.len(), n);
    let mut x = b.to_vec();
    for i in 0..n {
        x[i] /= u[(i, i)];
        let xi = x[i];
        let row = u.row(i);
        for j in (i + 1)..n {
            x[j] -= row[j] * xi;
        }
    }
    x
}

/// Solves S x = b for SPD S via Cholesky.
pub fn solve_spd(s: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != s.rows() {
        return Err(Error::Dimension(format!(
            "right-hand side of length {} for a {}x{} system",
            b.len(),
            s.rows(),
            s.cols()
        )));
    }
    let u = chol(s)?;
    Ok(solve_upper(&u, &solve_lower_transposed(&u, b)))
}

fn check_symmetric(s: &Matrix, tol: &Tolerances) -> Result<()> {
    if !s.is_square() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    let asym = s.asymmetry();
    if asym > tol.symmetry * s.max_abs() {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}
