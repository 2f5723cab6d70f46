use super::{Matrix, Tolerances};
use crate::error::{Error, Result};

/// Full symmetric eigendecomposition: `values` descending, column `k` of
/// `vectors` paired with `values[k]`.
#[derive(Clone, Debug)]
pub struct SymEig {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymEig {
    pub fn min(&self) -> f64 {
        *self.values.last().expect("empty spectrum")
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.col(k)
    }

    /// Q diag(f(values)) Q^T
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.values.len();
        let q = &self.vectors;
        let fv: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += q[(i, k)] * fv[k] * q[(j, k)];
                }
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        out
    }

    pub fn reconstruct(&self) -> Matrix {
        self.map_spectrum(|v| v)
    }

    /// Number of eigenvalues above `rel * max|value|`.
    pub fn numerical_rank(&self, rel: f64) -> usize {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0;
        }
        self.values.iter().filter(|&&v| v > rel * scale).count()
    }
}

pub fn sym_eig(s: &Matrix) -> Result<SymEig> {
    sym_eig_with(s, &Tolerances::default())
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
pub fn sym_eig_with(s: &Matrix, tol: &Tolerances) -> Result<SymEig> {
    if !s.is_square() {
        return Err(Error::Dimension(format!(
            "sym_eig needs a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    if !s.is_finite() {
        return Err(Error::InvalidArgument("non-finite entry in sym_eig input".into()));
    }
    let n = s.rows();
    let scale = s.max_abs();
    let asym = s.asymmetry();
    if asym > tol.symmetry * scale.max(1e-300) && asym > 0.0 {
        return Err(Error::NotSymmetric(asym));
    }
    let mut a = s.symmetrized();
    let mut v = Matrix::identity(n);
    let fro = a.frobenius();

    if n > 1 && fro > 0.0 {
        let target = tol.jacobi * fro;
        let mut converged = false;
        for _sweep in 0..tol.max_sweeps {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[(p, q)] * a[(p, q)];
                }
            }
            if off.sqrt() <= target {
                converged = true;
                break;
            }
            for p in 0..n - 1 {
                for q in (p + 1)..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
        if !converged {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[(p, q)] * a[(p, q)];
                }
            }
            // tolerate stagnation at roundoff level
            if off.sqrt() > 1e3 * target {
                return Err(Error::Numerical(format!(
                    "Jacobi did not converge in {} sweeps (off-diagonal {:e})",
                    tol.max_sweeps,
                    off.sqrt()
                )));
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values: Vec<f64> = order.iter().map(|&k| a[(k, k)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.col(src);
        fix_sign(&mut col, tol.sign);
        vectors.set_col(dst, &col);
    }
    Ok(SymEig { values, vectors })
}

/// Zero a[p][q] with one Jacobi rotation, accumulating into v.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    // negligible against both diagonal entries: drop it
    if apq.abs() < 1e-18 * app.abs().min(aqq.abs()) {
        a[(p, q)] = 0.0;
        a[(q, p)] = 0.0;
        return;
    }
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let tau = s / (1.0 + c);

    a[(p, p)] = app - t * apq;
    a[(q, q)] = aqq + t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    let n = a.rows();
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let g = a[(r, p)];
        let h = a[(r, q)];
        let new_rp = g - s * (h + g * tau);
        let new_rq = h + s * (g - h * tau);
        a[(r, p)] = new_rp;
        a[(p, r)] = new_rp;
        a[(r, q)] = new_rq;
        a[(q, r)] = new_rq;
    }
    for r in 0..n {
        let g = v[(r, p)];
        let h = v[(r, q)];
        v[(r, p)] = g - s * (h + g * tau);
        v[(r, q)] = h + s * (g - h * tau);
    }
}

/// First component that is not negligible is made positive.
fn fix_sign(col: &mut [f64], rel: f64) {
    let big = col.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = col.iter().find(|x| x.abs() > rel * big) {
        if *first < 0.0 {
            col.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_symmetric(n: usize, rng: &mut ChaCha20Rng) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v: f64 = rng.random_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    /// Naive QR iteration (classical Gram-Schmidt QR, constant shift making the
    /// spectrum positive). Independent of the Jacobi kernel.
    fn qr_iteration_spectrum(s: &Matrix) -> Vec<f64> {
        let n = s.rows();
        let shift = s.frobenius() + 1.0;
        let mut a: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| s[(i, j)] + if i == j { shift } else { 0.0 }).collect())
            .collect();
        for _ in 0..20000 {
            // columns of a
            let cols: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| a[i][j]).collect()).collect();
            let mut q: Vec<Vec<f64>> = Vec::new();
            let mut r = vec![vec![0.0; n]; n];
            for j in 0..n {
                let mut v = cols[j].clone();
                for (k, qk) in q.iter().enumerate() {
                    let proj: f64 = qk.iter().zip(&cols[j]).map(|(x, y)| x * y).sum();
                    r[k][j] = proj;
                    for i in 0..n {
                        v[i] -= proj * qk[i];
                    }
                }
                let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                r[j][j] = nv;
                q.push(v.iter().map(|x| x / nv).collect());
            }
            // a = r * q  (q stored by columns)
            let mut next = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    next[i][j] = (0..n).map(|k| r[i][k] * q[j][k]).sum();
                }
            }
            a = next;
        }
        let mut vals: Vec<f64> = (0..n).map(|i| a[i][i] - shift).collect();
        vals.sort_by(|x, y| y.total_cmp(x));
        vals
    }

    #[test]
    fn identity_spectrum() {
        let e = sym_eig(&Matrix::identity(3)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
        let qtq = e.vectors.tr_matmul(&e.vectors);
        assert!(qtq.sub(&Matrix::identity(3)).max_abs() < 1e-14);
    }

    #[test]
    fn diagonal_case_sorted_with_axis_vectors() {
        let s = Matrix::from_diag(&[1.0, 4.0]);
        let e = sym_eig(&s).unwrap();
        assert_eq!(e.values, vec![4.0, 1.0]);
        assert_eq!(e.vector(0), vec![0.0, 1.0]);
        assert_eq!(e.vector(1), vec![1.0, 0.0]);
    }

    #[test]
    fn matches_qr_iteration_oracle() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for _ in 0..5 {
            let s = random_symmetric(5, &mut rng);
            let oracle = qr_iteration_spectrum(&s);
            let e = sym_eig(&s).unwrap();
            for (a, b) in e.values.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn reconstruction_and_orthogonality() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for n in [1, 2, 7, 30] {
            let s = random_symmetric(n, &mut rng);
            let e = sym_eig(&s).unwrap();
            let qtq = e.vectors.tr_matmul(&e.vectors);
            assert!(qtq.sub(&Matrix::identity(n)).max_abs() <= 1e-10);
            let sq = s.matmul(&e.vectors);
            let qd = e.vectors.matmul(&Matrix::from_diag(&e.values));
            assert!(sq.sub(&qd).max_abs() <= 1e-8 * s.max_abs());
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rejects_bad_input() {
        let ns = Matrix::zeros(2, 3);
        assert!(matches!(sym_eig(&ns), Err(Error::Dimension(_))));
        let asym = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&asym), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn sign_convention_first_component_positive() {
        let s = Matrix::from_rows(&[vec![2.0, -1.0], vec![-1.0, 2.0]]).unwrap();
        let e = sym_eig(&s).unwrap();
        for k in 0..2 {
            assert!(e.vector(k)[0] > 0.0);
        }
    }
}
