use crate::error::{Error, Result};
use crate::matkit::{self, dot, norm, Matrix};

#[derive(Clone, Debug)]
pub struct TrustRegionResult {
    pub x_star: Vec<f64>,
    pub value: f64,
    pub multiplier: f64,
    pub boundary: bool,
    /// the minimizer needed a null-space component (hard case)
    pub hard_case: bool,
}

/// Global minimizer of x^T A x + 2 b^T x over ‖x‖ ≤ radius.
pub fn trust_region(a: &Matrix, b: &[f64], radius: f64) -> Result<TrustRegionResult> {
    let n = a.rows();
    if !a.is_square() || b.len() != n {
        return Err(Error::Dimension(format!(
            "trust region with a {}x{} matrix and a vector of length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    let eig = matkit::sym_eig(&a.symmetrized())?;
    let lam = &eig.values;
    let q = &eig.vectors;
    let bt = q.tr_matvec(b);
    let lmin = eig.min();
    let scale = lam.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(norm(b) / radius).max(1e-300);

    // x(μ) in the eigenbasis: −b̃_i/(λ_i + μ)
    let step_norm = |mu: f64| -> f64 {
        lam.iter()
            .zip(&bt)
            .map(|(l, bi)| {
                let d = l + mu;
                if d == 0.0 {
                    if *bi == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    (bi / d).powi(2)
                }
            })
            .sum::<f64>()
            .sqrt()
    };
    let assemble = |mu: f64, skip_tol: f64| -> Vec<f64> {
        let mut coeffs = vec![0.0; n];
        for i in 0..n {
            let d = lam[i] + mu;
            if d.abs() > skip_tol {
                coeffs[i] = -bt[i] / d;
            }
        }
        q.matvec(&coeffs)
    };
    let finish = |x: Vec<f64>, mu: f64, boundary: bool, hard: bool| -> TrustRegionResult {
        let value = a.quad_form(&x) + 2.0 * dot(b, &x);
        TrustRegionResult {
            x_star: x,
            value,
            multiplier: mu,
            boundary,
            hard_case: hard,
        }
    };

    // interior solution when A ≻ 0 and the Newton step fits
    if lmin > 0.0 && step_norm(0.0) <= radius {
        return Ok(finish(assemble(0.0, 0.0), 0.0, false, false));
    }

    let mu_low = (-lmin).max(0.0);
    let tol_deg = 1e-12 * scale;
    // components of b along the bottom eigenspace
    let bottom: Vec<usize> = (0..n).filter(|&i| lam[i] - lmin <= tol_deg).collect();
    let b_bottom = bottom.iter().map(|&i| bt[i] * bt[i]).sum::<f64>().sqrt();
    if b_bottom <= 1e-12 * norm(&bt).max(scale * radius) {
        // possible hard case: the step with μ = −λ_min ignoring the bottom space
        let partial = lam
            .iter()
            .zip(&bt)
            .enumerate()
            .filter(|(i, _)| !bottom.contains(i))
            .map(|(_, (l, bi))| (bi / (l + mu_low)).powi(2))
            .sum::<f64>()
            .sqrt();
        if partial <= radius {
            let mut x = assemble(mu_low, tol_deg);
            let tau = (radius * radius - partial * partial).max(0.0).sqrt();
            let v = q.col(bottom[0]);
            matkit::axpy(tau, &v, &mut x);
            return Ok(finish(x, mu_low, true, true));
        }
    }

    // easy case: ‖x(μ)‖ = radius for a unique μ > μ_low. Newton on
    // φ(μ) = 1/‖x(μ)‖ − 1/radius, which is concave and increasing.
    let mut lo = mu_low;
    let mut hi = mu_low + norm(&bt) / radius + scale;
    while step_norm(hi) > radius {
        hi = mu_low + 2.0 * (hi - mu_low);
    }
    let mut mu = hi;
    for _ in 0..200 {
        let nx = step_norm(mu);
        let phi = 1.0 / nx - 1.0 / radius;
        if phi.abs() <= 1e-15 / radius {
            break;
        }
        if phi < 0.0 {
            lo = lo.max(mu);
        } else {
            hi = hi.min(mu);
        }
        // dφ/dμ = (Σ b̃²/(λ+μ)³) / ‖x‖³
        let d3: f64 = lam.iter().zip(&bt).map(|(l, bi)| bi * bi / (l + mu).powi(3)).sum();
        let dphi = d3 / (nx * nx * nx);
        let mut next = mu - phi / dphi;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - mu).abs() <= 1e-16 * mu.abs().max(1e-300) {
            mu = next;
            break;
        }
        mu = next;
    }
    let mut x = assemble(mu, 0.0);
    // land exactly on the sphere
    let nx = norm(&x);
    if nx > 0.0 {
        x.iter_mut().for_each(|v| *v *= radius / nx);
    }
    Ok(finish(x, mu, true, false))
}
