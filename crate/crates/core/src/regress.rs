//! Least-squares fitting and the one-point refit identity.

use crate::error::{Error, Result};
use crate::matkit::{self, dot, Matrix, SvdFactors};

/// Feature matrix `x` (n×m) and response `y` (length n).
#[derive(Clone, Debug)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vec<f64>) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(Error::Dimension(format!(
                "response has {} entries but X has {} rows",
                y.len(),
                x.rows()
            )));
        }
        if x.rows() <= x.cols() {
            return Err(Error::Dimension(format!(
                "need more samples than features, got {}x{}",
                x.rows(),
                x.cols()
            )));
        }
        if !x.is_finite() || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite value in dataset".into()));
        }
        Ok(Dataset {
            x,
            y,
            feature_names: None,
        })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.x.cols() {
            return Err(Error::Dimension(format!(
                "{} feature names for {} features",
                names.len(),
                self.x.cols()
            )));
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn m(&self) -> usize {
        self.x.cols()
    }

    /// Copy with one extra row appended.
    pub fn with_point(&self, x0: &[f64], y0: f64) -> Result<Dataset> {
        if x0.len() != self.m() {
            return Err(Error::Dimension(format!(
                "poison point has {} features, dataset has {}",
                x0.len(),
                self.m()
            )));
        }
        let mut data = self.x.as_slice().to_vec();
        data.extend_from_slice(x0);
        let x = Matrix::from_row_major(self.n() + 1, self.m(), data)?;
        let mut y = self.y.clone();
        y.push(y0);
        Ok(Dataset {
            x,
            y,
            feature_names: self.feature_names.clone(),
        })
    }
}

/// Everything the attacks need from a clean fit.
#[derive(Clone, Debug)]
pub struct RegressionFit {
    pub beta0: Vec<f64>,
    /// A = (X^T X + reg I)^{-1}
    pub gram_inv: Matrix,
    /// X^+ (m×n)
    pub pinv: Matrix,
    pub svd: SvdFactors,
    /// I - X X^+ (n×n)
    pub proj_residual: Matrix,
    /// y - X beta0
    pub residual: Vec<f64>,
    pub reg: f64,
}

impl RegressionFit {
    pub fn m(&self) -> usize {
        self.beta0.len()
    }

    pub fn n(&self) -> usize {
        self.pinv.cols()
    }

    pub fn sigma_min(&self) -> f64 {
        self.svd.sigma_min()
    }
}

/// Adversarial row (x0, y0) together with the coefficients it produces.
#[derive(Clone, Debug, PartialEq)]
pub struct PoisonPoint {
    pub x0: Vec<f64>,
    pub y0: f64,
    pub predicted_beta: Vec<f64>,
    pub predicted_value: f64,
}

impl PoisonPoint {
    /// ||[x0; y0]||
    pub fn energy(&self) -> f64 {
        (dot(&self.x0, &self.x0) + self.y0 * self.y0).sqrt()
    }
}

pub fn fit_ols(data: &Dataset) -> Result<RegressionFit> {
    fit_ridge(data, 0.0)
}

/// Ridge fit; `reg = 0` is ordinary least squares.
pub fn fit_ridge(data: &Dataset, reg: f64) -> Result<RegressionFit> {
    if !(reg >= 0.0) || !reg.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "ridge parameter must be finite and nonnegative, got {reg}"
        )));
    }
    let svd = matkit::svd(&data.x)?;
    let tol = matkit::Tolerances::default();
    let (smin, smax) = (svd.sigma_min(), svd.sigma_max());
    if smax == 0.0 || smin <= tol.rank * smax {
        return Err(Error::Singular {
            sigma_min: smin,
            sigma_max: smax,
        });
    }
    let (n, m) = (data.n(), data.m());
    let v = &svd.v;
    let sv = &svd.singular_values;

    // A = V diag(1/(s^2 + reg)) V^T
    let mut gram_inv = Matrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let s: f64 = (0..m).map(|k| v[(i, k)] * v[(j, k)] / (sv[k] * sv[k] + reg)).sum();
            gram_inv[(i, j)] = s;
            gram_inv[(j, i)] = s;
        }
    }

    // X^+ = V Σ^{-1} U_1^T
    let mut pinv = Matrix::zeros(m, n);
    for i in 0..m {
        for k in 0..m {
            let w = v[(i, k)] / sv[k];
            let row = pinv.row_mut(i);
            for (j, o) in row.iter_mut().enumerate() {
                *o += w * svd.u[(j, k)];
            }
        }
    }

    let xty = data.x.tr_matvec(&data.y);
    let beta0 = gram_inv.matvec(&xty);
    let residual = matkit::sub(&data.y, &data.x.matvec(&beta0));

    let mut proj_residual = Matrix::identity(n);
    for k in 0..m {
        let uk = svd.u.col(k);
        for i in 0..n {
            let ui = uk[i];
            if ui == 0.0 {
                continue;
            }
            let row = proj_residual.row_mut(i);
            for (o, &uj) in row.iter_mut().zip(&uk) {
                *o -= ui * uj;
            }
        }
    }

    Ok(RegressionFit {
        beta0,
        gram_inv,
        pinv,
        svd,
        proj_residual,
        residual,
        reg,
    })
}

/// Coefficients after adding (x0, y0), by the rank-one update of A.
pub fn refit_add_point(fit: &RegressionFit, x0: &[f64], y0: f64) -> Result<Vec<f64>> {
    if x0.len() != fit.m() {
        return Err(Error::Dimension(format!(
            "poison point has {} features, fit has {}",
            x0.len(),
            fit.m()
        )));
    }
    let ax = fit.gram_inv.matvec(x0);
    let denom = 1.0 + dot(x0, &ax);
    let scale = (y0 - dot(x0, &fit.beta0)) / denom;
    Ok(fit
        .beta0
        .iter()
        .zip(&ax)
        .map(|(b, a)| b + a * scale)
        .collect())
}

/// Coefficients after adding (x0, y0), by refitting from scratch.
pub fn refit_direct(data: &Dataset, x0: &[f64], y0: f64) -> Result<Vec<f64>> {
    refit_direct_ridge(data, x0, y0, 0.0)
}

pub fn refit_direct_ridge(data: &Dataset, x0: &[f64], y0: f64, reg: f64) -> Result<Vec<f64>> {
    let aug = data.with_point(x0, y0)?;
    let mut gram = aug.x.tr_matmul(&aug.x);
    for k in 0..aug.m() {
        gram[(k, k)] += reg;
    }
    let rhs = aug.x.tr_matvec(&aug.y);
    matkit::solve_spd(&gram.symmetrized(), &rhs).map_err(|e| match e {
        Error::NotPositiveDefinite { pivot, .. } => Error::Singular {
            sigma_min: pivot.max(0.0).sqrt(),
            sigma_max: gram.max_abs().sqrt(),
        },
        other => other,
    })
}
