//! One-point attack on a single coefficient with a penalty on moving the
//! others, rewritten as a quartic over a ball and solved by moment relaxation.

use crate::error::{Error, Result};
use crate::lasserre::{
    certify_and_extract, extract_symmetric_pair, solve_min_trace, solve_relaxation, Certificate, Polynomial, PolynomialProgram,
};
use crate::matkit::{self, dot, norm, Matrix};
use crate::regress::{PoisonPoint, RegressionFit};
use crate::sdpcore::{SdpOptions, SdpStatus};

/// q(x) = ½ (H x eᵀx − b)ᵀ Λ (H x eᵀx − b) over ‖x‖ ≤ η.
#[derive(Clone, Debug)]
pub struct QuarticProgram {
    /// H = A₁U⁻¹, m×(m+1)
    pub h_mat: Matrix,
    /// U⁻ᵀ[−β₀; 1]
    pub e: Vec<f64>,
    /// d − β₀
    pub b: Vec<f64>,
    /// diagonal of Λ
    pub weights: Vec<f64>,
    /// upper factor with UᵀU = I + η²A₂
    pub u: Matrix,
    pub a2: Matrix,
    pub beta0: Vec<f64>,
    pub eta: f64,
    pub lambda: f64,
    pub index: usize,
}

pub fn build_quartic(fit: &RegressionFit, index: usize, eta: f64, lambda: f64) -> Result<QuarticProgram> {
    let m = fit.m();
    if index >= m {
        return Err(Error::InvalidArgument(format!("coefficient index {index} out of range for {m} features")));
    }
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidArgument(format!("budget must be positive, got {eta}")));
    }
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument("trade-off weight must be finite".into()));
    }
    let a = &fit.gram_inv;
    let mut a2 = Matrix::zeros(m + 1, m + 1);
    for i in 0..m {
        for j in 0..m {
            a2[(i, j)] = a[(i, j)];
        }
    }
    let mut shifted = a2.scale(eta * eta);
    for k in 0..=m {
        shifted[(k, k)] += 1.0;
    }
    let u = matkit::chol(&shifted.symmetrized())?;

    let mut h_mat = Matrix::zeros(m, m + 1);
    for k in 0..m {
        let mut row = a.row(k).to_vec();
        row.push(0.0);
        // row k of A₁U⁻¹ is U⁻ᵀ applied to row k of A₁
        let hk = matkit::solve_lower_transposed(&u, &row);
        h_mat.row_mut(k).copy_from_slice(&hk);
    }
    let mut c: Vec<f64> = fit.beta0.iter().map(|v| -v).collect();
    c.push(1.0);
    let e = matkit::solve_lower_transposed(&u, &c);

    let mut b = vec![0.0; m];
    b[index] = -fit.beta0[index];
    let mut weights = vec![1.0; m];
    weights[index] = lambda;

    Ok(QuarticProgram {
        h_mat,
        e,
        b,
        weights,
        u,
        a2,
        beta0: fit.beta0.clone(),
        eta,
        lambda,
        index,
    })
}

impl QuarticProgram {
    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn dim(&self) -> usize {
        self.e.len()
    }

    fn residual(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
        let hx = self.h_mat.matvec(x);
        let ex = dot(&self.e, x);
        let r = hx.iter().zip(&self.b).map(|(h, b)| h * ex - b).collect();
        (r, hx, ex)
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let (r, ..) = self.residual(x);
        0.5 * r.iter().zip(&self.weights).map(|(v, w)| w * v * v).sum::<f64>()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (r, hx, ex) = self.residual(x);
        let mut g = vec![0.0; self.dim()];
        for k in 0..self.m() {
            let wr = self.weights[k] * r[k];
            if wr == 0.0 {
                continue;
            }
            matkit::axpy(wr * ex, self.h_mat.row(k), &mut g);
            matkit::axpy(wr * hx[k], &self.e, &mut g);
        }
        g
    }

    /// ½ (β̂ − d)ᵀ Λ (β̂ − d) for given coefficients.
    pub fn coefficient_objective(&self, beta: &[f64]) -> f64 {
        let mut total = 0.0;
        for k in 0..self.m() {
            let d = if k == self.index { 0.0 } else { self.beta0[k] };
            total += self.weights[k] * (beta[k] - d).powi(2);
        }
        0.5 * total
    }

    /// The program variable for a poison point: x = U w, w = z/√(1 + zᵀA₂z).
    pub fn point_to_x(&self, x0: &[f64], y0: f64) -> Vec<f64> {
        let mut z = x0.to_vec();
        z.push(y0);
        let s = 1.0 / (1.0 + self.a2.quad_form(&z)).sqrt();
        let w = matkit::scaled(s, &z);
        self.u.matvec(&w)
    }

    fn predicted_beta(&self, x0: &[f64], y0: f64) -> Vec<f64> {
        let m = self.m();
        let a = self.a2.block(0, m, 0, m);
        let ax = a.matvec(x0);
        let scale = (y0 - dot(x0, &self.beta0)) / (1.0 + dot(x0, &ax));
        self.beta0.iter().zip(&ax).map(|(b, v)| b + v * scale).collect()
    }
}

fn linear_form(n: usize, coeffs: &[f64]) -> Polynomial {
    let mut p = Polynomial::zero(n);
    for (j, &c) in coeffs.iter().enumerate() {
        let mut alpha = vec![0; n];
        alpha[j] = 1;
        p.add_term(alpha, c);
    }
    p
}

/// Expands q into monomials, with the single constraint η² − xᵀx ≥ 0.
pub fn as_polynomial(qp: &QuarticProgram) -> PolynomialProgram {
    let n = qp.dim();
    let ex = linear_form(n, &qp.e);
    let mut q = Polynomial::zero(n);
    for k in 0..qp.m() {
        if qp.weights[k] == 0.0 {
            continue;
        }
        let r = linear_form(n, qp.h_mat.row(k))
            .mul(&ex)
            .add(&Polynomial::constant(n, -qp.b[k]));
        q = q.add(&r.mul(&r).scale(0.5 * qp.weights[k]));
    }
    PolynomialProgram {
        objective: q,
        constraints: vec![ball(n, qp.eta)],
    }
}

fn ball(n: usize, radius: f64) -> Polynomial {
    let mut g = Polynomial::constant(n, radius * radius);
    for j in 0..n {
        let mut alpha = vec![0; n];
        alpha[j] = 2;
        g.add_term(alpha, -1.0);
    }
    g
}

/// Maps a program solution back to the poison point (x₀, y₀), with w = U⁻¹x.
pub fn recover_attack(x_star: &[f64], qp: &QuarticProgram) -> Result<PoisonPoint> {
    if x_star.len() != qp.dim() {
        return Err(Error::Dimension(format!("solution has {} entries, program has {}", x_star.len(), qp.dim())));
    }
    if norm(x_star) > qp.eta * (1.0 + 1e-8) {
        return Err(Error::InvalidArgument(format!(
            "solution norm {} exceeds the budget {}",
            norm(x_star),
            qp.eta
        )));
    }
    let w = matkit::solve_upper(&qp.u, x_star);
    let s2 = 1.0 - qp.a2.quad_form(&w);
    if !(s2 > 0.0) {
        return Err(Error::InfeasibleRecovery(s2));
    }
    let s = s2.sqrt();
    let m = qp.m();
    let x0: Vec<f64> = w[..m].iter().map(|v| v / s).collect();
    let y0 = w[m] / s;
    let predicted_beta = qp.predicted_beta(&x0, y0);
    let predicted_value = qp.coefficient_objective(&predicted_beta);
    Ok(PoisonPoint {
        x0,
        y0,
        predicted_beta,
        predicted_value,
    })
}

#[derive(Clone, Debug)]
pub struct PolyAttack {
    pub point: PoisonPoint,
    pub x_star: Vec<f64>,
    /// relaxation lower bound p*
    pub bound: f64,
    /// q(x*) at the extracted and polished point
    pub value: f64,
    pub certificate: Certificate,
    pub order: u32,
    pub sdp_status: SdpStatus,
    pub sdp_iterations: usize,
}

impl PolyAttack {
    /// q(x*) − p*, nonnegative up to solver accuracy
    pub fn gap(&self) -> f64 {
        self.value - self.bound
    }

    /// Rank test passed, or the point already meets the relaxation bound.
    /// The second case covers optima attained on a continuum, where the
    /// moment matrix cannot have flat rank.
    pub fn globally_optimal(&self) -> bool {
        self.certificate.rank_ok || self.gap() <= 1e-6 * (1.0 + self.value.abs())
    }
}

/// Relative objective slack admitted when searching the optimal face.
const FACE_SLACK: f64 = 1e-6;

/// Projected gradient with backtracking, only ever accepting decreases.
fn polish(qp: &QuarticProgram, start: &[f64], iters: usize) -> Vec<f64> {
    let project = |x: &mut Vec<f64>| {
        let nx = norm(x);
        if nx > qp.eta {
            x.iter_mut().for_each(|v| *v *= qp.eta / nx);
        }
    };
    let mut x = start.to_vec();
    project(&mut x);
    let mut fx = qp.objective(&x);
    let mut step = 1.0;
    for _ in 0..iters {
        let g = qp.gradient(&x);
        let gn = norm(&g);
        if gn == 0.0 {
            break;
        }
        let mut moved = false;
        for _ in 0..60 {
            let mut trial = x.clone();
            matkit::axpy(-step, &g, &mut trial);
            project(&mut trial);
            let ft = qp.objective(&trial);
            if ft < fx {
                let shift = norm(&matkit::sub(&trial, &x));
                x = trial;
                fx = ft;
                step *= 2.0;
                moved = shift > 1e-15 * qp.eta;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    x
}

/// Relaxation of the given order, extraction, local polish and recovery.
pub fn solve_quartic(qp: &QuarticProgram, order: u32, opts: &SdpOptions) -> Result<PolyAttack> {
    let raw = as_polynomial(qp);
    let n = qp.dim();
    // unit ball and unit-size coefficients for the SDP
    let on_unit_ball = raw.objective.rescale_vars(qp.eta);
    let constant = on_unit_ball.constant_term();
    let spread = on_unit_ball.max_nonconstant_coeff();
    let scale = if spread > 0.0 { spread } else { 1.0 };
    let scaled = on_unit_ball.add(&Polynomial::constant(n, -constant)).scale(1.0 / scale);
    // built directly: a flat objective leaves no terms after removing the constant
    let program = PolynomialProgram {
        objective: scaled,
        constraints: vec![ball(n, 1.0)],
    };
    let sol = solve_relaxation(&program, order, opts)?;
    let bound = sol.bound * scale + constant;
    let mut certificate = certify_and_extract(&sol.moments, order, sol.w_max)?;
    let mut moment_sets = vec![sol.moments];
    if !certificate.rank_ok {
        // optimal face, then the smallest-trace point on it
        let level = sol.bound + FACE_SLACK * (1.0 + sol.bound.abs());
        match solve_min_trace(&program, order, level, opts) {
            Ok(face) => {
                let cert = certify_and_extract(&face.moments, order, face.w_max)?;
                if cert.rank_ok {
                    certificate = cert;
                }
                moment_sets.push(face.moments);
            }
            Err(e) => log::debug!("minimum-trace pass failed: {e}"),
        }
    }

    let mut candidates: Vec<Vec<f64>> = vec![vec![0.0; n]];
    if let Some(x) = &certificate.minimizer {
        candidates.push(x.clone());
    }
    for moments in &moment_sets {
        if let Some([p, m]) = extract_symmetric_pair(moments)? {
            candidates.push(p);
            candidates.push(m);
        }
        // always try the leading direction of the second moments as well
        let second = moments.second_moments();
        let eig = matkit::sym_eig(&second.symmetrized())?;
        if eig.max() > 0.0 {
            candidates.push(matkit::scaled(eig.max().sqrt().min(1.0), &eig.vector(0)));
        }
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    for cand in candidates {
        let x = polish(qp, &matkit::scaled(qp.eta, &cand), 500);
        let fx = qp.objective(&x);
        if best.as_ref().is_none_or(|(fb, _)| fx < *fb) {
            best = Some((fx, x));
        }
    }
    let (value, x_star) = best.expect("at least the origin is a candidate");
    let point = recover_attack(&x_star, qp)?;
    Ok(PolyAttack {
        point,
        x_star,
        bound,
        value,
        certificate,
        order,
        sdp_status: sol.sdp.status,
        sdp_iterations: sol.sdp.iterations,
    })
}
