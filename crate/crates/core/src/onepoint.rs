//! Closed-form optimal single poisoning point against one coefficient.

use crate::error::{Error, Result};
use crate::matkit::{self, dot, norm, Matrix};
use crate::regress::{refit_add_point, PoisonPoint, RegressionFit};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Objectives on |β̂_i|.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AbsSense {
    Shrink,
    Grow,
}

/// The whitened quadratic program for coefficient `index` under budget `eta`.
#[derive(Clone, Debug)]
pub struct WhitenedProblem {
    pub index: usize,
    pub eta: f64,
    /// (1/√2)(I + η²A)^{-1/2}
    pub g_mat: Matrix,
    pub g: f64,
    /// G a, with a the target column of A
    pub c: Vec<f64>,
    /// G β₀
    pub h: Vec<f64>,
    /// objective matrix over u = [x0; y0]
    pub h_mat: Matrix,
    /// 2(I + η² diag(A, 0))
    pub d_mat: Matrix,
    pub beta_i: f64,
}

impl WhitenedProblem {
    pub fn dim(&self) -> usize {
        self.c.len() + 1
    }

    /// D^{-1/2} = diag(G, g)
    pub fn d_inv_sqrt(&self) -> Matrix {
        let m = self.c.len();
        let mut out = Matrix::zeros(m + 1, m + 1);
        for i in 0..m {
            for j in 0..m {
                out[(i, j)] = self.g_mat[(i, j)];
            }
        }
        out[(m, m)] = self.g;
        out
    }

    /// D^{-1/2} H D^{-1/2}, formed from c, h and g.
    pub fn whitened_matrix(&self) -> Matrix {
        let m = self.c.len();
        let (c, h, g) = (&self.c, &self.h, self.g);
        Matrix::from_fn(m + 1, m + 1, |i, j| match (i < m, j < m) {
            (true, true) => -c[i] * h[j] - h[i] * c[j],
            (true, false) => g * c[i],
            (false, true) => g * c[j],
            (false, false) => 0.0,
        })
    }

    /// Rayleigh-type objective aᵀx(y − β₀ᵀx)/(1 + xᵀAx) for u = [x; y]. It is
    /// the change in β_i produced by the point.
    pub fn ratio_objective(&self, fit: &RegressionFit, u: &[f64]) -> f64 {
        let m = self.c.len();
        let (x, y) = (&u[..m], u[m]);
        let ax = fit.gram_inv.matvec(x);
        ax[self.index] * (y - dot(x, &fit.beta0)) / (1.0 + dot(x, &ax))
    }
}

/// Extreme eigenpairs of D^{-1/2} H D^{-1/2}.
#[derive(Clone, Debug)]
pub struct ExtremePair {
    pub xi_pos: f64,
    pub xi_neg: f64,
    pub nu_pos: Vec<f64>,
    pub nu_neg: Vec<f64>,
}

pub fn build_whitened(fit: &RegressionFit, index: usize, eta: f64) -> Result<WhitenedProblem> {
    let m = fit.m();
    if index >= m {
        return Err(Error::InvalidArgument(format!(
            "coefficient index {index} out of range for {m} features"
        )));
    }
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidArgument(format!("budget must be positive, got {eta}")));
    }
    let a_col = fit.gram_inv.col(index);
    let mut s = fit.gram_inv.scale(eta * eta);
    for k in 0..m {
        s[(k, k)] += 1.0;
    }
    let g_mat = matkit::inv_sqrt(&s.symmetrized())?.scale(std::f64::consts::FRAC_1_SQRT_2);
    let g = std::f64::consts::FRAC_1_SQRT_2;
    let c = g_mat.matvec(&a_col);
    let h = g_mat.matvec(&fit.beta0);
    let b = &fit.beta0;
    let h_mat = Matrix::from_fn(m + 1, m + 1, |i, j| match (i < m, j < m) {
        (true, true) => -a_col[i] * b[j] - b[i] * a_col[j],
        (true, false) => a_col[i],
        (false, true) => a_col[j],
        (false, false) => 0.0,
    });
    let mut d_mat = Matrix::zeros(m + 1, m + 1);
    for i in 0..m {
        for j in 0..m {
            d_mat[(i, j)] = 2.0 * eta * eta * fit.gram_inv[(i, j)];
        }
        d_mat[(i, i)] += 2.0;
    }
    d_mat[(m, m)] = 2.0;
    let d_mat = d_mat.symmetrized();
    Ok(WhitenedProblem {
        index,
        eta,
        g_mat,
        g,
        c,
        h,
        h_mat,
        d_mat,
        beta_i: fit.beta0[index],
    })
}

pub fn extreme_eigs(wp: &WhitenedProblem) -> Result<ExtremePair> {
    let nc = norm(&wp.c);
    if nc == 0.0 {
        return Err(Error::DegenerateTarget(wp.index));
    }
    let ch = dot(&wp.c, &wp.h);
    let rho = (wp.g * wp.g + dot(&wp.h, &wp.h)).sqrt();
    let xi_pos = -ch + nc * rho;
    let xi_neg = -ch - nc * rho;
    // eigenvector ∝ [h − (cᵀh + ξ)/(cᵀc) c ; −g] with (cᵀh + ξ)/‖c‖ = ±ρ
    let vector = |sign: f64| -> Vec<f64> {
        let coef = sign * rho / nc;
        let mut v: Vec<f64> = wp.h.iter().zip(&wp.c).map(|(h, c)| h - coef * c).collect();
        v.push(-wp.g);
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        v
    };
    Ok(ExtremePair {
        xi_pos,
        xi_neg,
        nu_pos: vector(1.0),
        nu_neg: vector(-1.0),
    })
}

/// Optimal point and value for a signed attack on coefficient `index`.
pub fn attack_coefficient(
    fit: &RegressionFit,
    index: usize,
    eta: f64,
    sense: Sense,
) -> Result<PoisonPoint> {
    let wp = build_whitened(fit, index, eta)?;
    let pair = extreme_eigs(&wp)?;
    let (xi, nu) = match sense {
        Sense::Minimize => (pair.xi_neg, &pair.nu_neg),
        Sense::Maximize => (pair.xi_pos, &pair.nu_pos),
    };
    let z = optimal_z(&wp, nu);
    let (x0, y0) = recover_point(fit, &z)?;
    let predicted_beta = refit_add_point(fit, &x0, y0)?;
    Ok(PoisonPoint {
        x0,
        y0,
        predicted_beta,
        predicted_value: eta * eta * xi + wp.beta_i,
    })
}

/// z* = √2 η D^{-1/2} ν
pub fn optimal_z(wp: &WhitenedProblem, nu: &[f64]) -> Vec<f64> {
    let m = wp.c.len();
    let k = std::f64::consts::SQRT_2 * wp.eta;
    let mut z = wp.g_mat.matvec(&nu[..m]);
    z.push(wp.g * nu[m]);
    z.iter_mut().for_each(|v| *v *= k);
    z
}

/// Undo the homogenization u = z/s, taking the positive root for s.
pub fn recover_point(fit: &RegressionFit, z: &[f64]) -> Result<(Vec<f64>, f64)> {
    let m = fit.m();
    let s2 = 1.0 - fit.gram_inv.quad_form(&z[..m]);
    if !(s2 > 0.0) {
        return Err(Error::InfeasibleRecovery(s2));
    }
    let s = s2.sqrt();
    Ok((z[..m].iter().map(|v| v / s).collect(), z[m] / s))
}

/// Result of an |β̂_i| objective.
#[derive(Clone, Debug)]
pub struct AbsAttack {
    pub point: PoisonPoint,
    /// which signed problem produced the point
    pub sense_used: Sense,
    /// optimal value of the |β̂_i| objective
    pub target_value: f64,
    /// the point was built by shrinking the budget until β̂_i hit zero
    pub zeroed: bool,
    /// budget actually spent (differs from the input only when `zeroed`)
    pub effective_eta: f64,
}

/// Shrink or grow |β̂_i|. With `exact_zero`, a shrink whose budget can cross
/// zero returns a point on the closed-form family that lands on zero.
pub fn solve_abs_objective(
    fit: &RegressionFit,
    index: usize,
    eta: f64,
    sense: AbsSense,
    exact_zero: bool,
) -> Result<AbsAttack> {
    let lo = attack_coefficient(fit, index, eta, Sense::Minimize)?;
    let hi = attack_coefficient(fit, index, eta, Sense::Maximize)?;
    let beta_i = fit.beta0[index];
    match sense {
        AbsSense::Grow => {
            let (point, used) = if lo.predicted_value.abs() >= hi.predicted_value.abs() {
                (lo, Sense::Minimize)
            } else {
                (hi, Sense::Maximize)
            };
            Ok(AbsAttack {
                target_value: point.predicted_value.abs(),
                point,
                sense_used: used,
                zeroed: false,
                effective_eta: eta,
            })
        }
        AbsSense::Shrink => {
            // move toward zero: down for a nonnegative coefficient, up otherwise
            let (toward, used) = if beta_i >= 0.0 {
                (lo, Sense::Minimize)
            } else {
                (hi, Sense::Maximize)
            };
            let crosses = toward.predicted_value.signum() != beta_i.signum()
                && toward.predicted_value != 0.0
                && beta_i != 0.0;
            if !crosses {
                return Ok(AbsAttack {
                    target_value: toward.predicted_value.abs(),
                    point: toward,
                    sense_used: used,
                    zeroed: false,
                    effective_eta: eta,
                });
            }
            if !exact_zero {
                return Ok(AbsAttack {
                    target_value: 0.0,
                    point: toward,
                    sense_used: used,
                    zeroed: false,
                    effective_eta: eta,
                });
            }
            let eff = zeroing_budget(fit, index, eta, used)?;
            let point = attack_coefficient(fit, index, eff, used)?;
            Ok(AbsAttack {
                target_value: 0.0,
                point,
                sense_used: used,
                zeroed: true,
                effective_eta: eff,
            })
        }
    }
}

/// Bisection on η' ∈ (0, η] for η'² ξ(η') + (β₀)_i = 0.
fn zeroing_budget(fit: &RegressionFit, index: usize, eta: f64, sense: Sense) -> Result<f64> {
    let beta_i = fit.beta0[index];
    let value = |e: f64| -> Result<f64> {
        let wp = build_whitened(fit, index, e)?;
        let p = extreme_eigs(&wp)?;
        let xi = match sense {
            Sense::Minimize => p.xi_neg,
            Sense::Maximize => p.xi_pos,
        };
        Ok(e * e * xi + beta_i)
    };
    let (mut a, mut b) = (0.0f64, eta);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let v = value(mid)?;
        if v == 0.0 {
            return Ok(mid);
        }
        if v.signum() == beta_i.signum() {
            a = mid;
        } else {
            b = mid;
        }
    }
    // b keeps the sign change, so it reaches or passes zero
    Ok(b)
}
