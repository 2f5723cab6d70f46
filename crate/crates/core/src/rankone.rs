//! Rank-one feature attack X → X + c dᵀ: pseudo-inverse update, the
//! objective h(c, d) = eᵀ G y, ratio-of-quadratics subproblems and the
//! alternating scheme between c and d.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matkit::{self, dot, norm, Matrix};
use crate::regress::RegressionFit;
use crate::sdpcore::{min_eig_affine, trust_region};

/// Which side of the ±e_i objective is attacked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// minimize β̂_i (e = e_i)
    Decrease,
    /// maximize β̂_i (e = −e_i)
    Increase,
}

impl Direction {
    pub fn selector(self, m: usize, index: usize) -> Vec<f64> {
        let mut e = vec![0.0; m];
        e[index] = match self {
            Direction::Decrease => 1.0,
            Direction::Increase => -1.0,
        };
        e
    }
}

/// Everything about the clean fit that h(c, d) needs, plus the basis used to
/// shrink the c-subproblem.
#[derive(Clone, Debug)]
pub struct RankOneContext {
    pub e: Vec<f64>,
    pub eta: f64,
    pub sigma_min: f64,
    pinv: Matrix,
    gram_inv: Matrix,
    /// first m left singular vectors, n×m
    u1: Matrix,
    beta0: Vec<f64>,
    /// y − Xβ₀, which equals (I − XX†)y
    residual: Vec<f64>,
    /// X†ᵀe
    q: Vec<f64>,
    /// A e
    ae: Vec<f64>,
    /// extra orthonormal directions of the residual space: r̂ then one more
    extra: Vec<Vec<f64>>,
    /// whether `extra` starts with r̂
    has_residual: bool,
}

/// Intermediate scalars of h for one (c, d).
#[derive(Clone, Copy, Debug)]
struct Parts {
    gamma: f64,
    /// eᵀX†c
    ev: f64,
    /// eᵀX†n = eᵀA d
    ep: f64,
    /// wᵀy
    wy: f64,
    /// nᵀy = β₀ᵀd
    ny: f64,
    /// ‖w‖²
    ww: f64,
    /// ‖n‖²
    nn: f64,
}

impl Parts {
    fn numerator(&self) -> f64 {
        self.gamma * self.ep * self.wy
            - self.ww * self.ep * self.ny
            - self.nn * self.ev * self.wy
            - self.gamma * self.ev * self.ny
    }

    fn denominator(&self) -> f64 {
        self.nn * self.ww + self.gamma * self.gamma
    }
}

impl RankOneContext {
    pub fn new(fit: &RegressionFit, e: Vec<f64>, eta: f64) -> Result<Self> {
        let (n, m) = (fit.n(), fit.m());
        if e.len() != m {
            return Err(Error::Dimension(format!("selector has {} entries for {m} coefficients", e.len())));
        }
        if fit.reg != 0.0 {
            return Err(Error::InvalidArgument("the rank-one attack needs an unregularized fit".into()));
        }
        if !(eta >= 0.0) || !eta.is_finite() {
            return Err(Error::InvalidArgument(format!("budget must be finite and nonnegative, got {eta}")));
        }
        let u1 = fit.svd.u_thin();
        let residual = fit.residual.clone();
        let mut extra: Vec<Vec<f64>> = Vec::new();
        let rn = norm(&residual);
        let mut basis: Vec<Vec<f64>> = (0..m).map(|k| u1.col(k)).collect();
        if rn > 1e-12 * (1.0 + fit.beta0.iter().map(|b| b.abs()).fold(0.0, f64::max)) {
            let mut r = matkit::scaled(1.0 / rn, &residual);
            orthogonalize(&mut r, &basis);
            let nr = norm(&r);
            r.iter_mut().for_each(|v| *v /= nr);
            basis.push(r.clone());
            extra.push(r);
        }
        if n > basis.len() {
            let accept = 0.5 / (n as f64).sqrt();
            for j in 0..n {
                let mut z = vec![0.0; n];
                z[j] = 1.0;
                orthogonalize(&mut z, &basis);
                let nz = norm(&z);
                if nz > accept {
                    z.iter_mut().for_each(|v| *v /= nz);
                    extra.push(z);
                    break;
                }
            }
        }
        Ok(RankOneContext {
            q: fit.pinv.tr_matvec(&e),
            ae: fit.gram_inv.matvec(&e),
            e,
            eta,
            sigma_min: fit.sigma_min(),
            pinv: fit.pinv.clone(),
            gram_inv: fit.gram_inv.clone(),
            u1,
            beta0: fit.beta0.clone(),
            has_residual: !extra.is_empty() && rn > 0.0 && dot(&extra[0], &residual) > 0.0,
            residual,
            extra,
        })
    }

    pub fn n(&self) -> usize {
        self.u1.rows()
    }

    pub fn m(&self) -> usize {
        self.u1.cols()
    }

    /// (I − XX†)c
    fn project_residual(&self, c: &[f64]) -> Vec<f64> {
        let coords = self.u1.tr_matvec(c);
        matkit::sub(c, &self.u1.matvec(&coords))
    }

    fn parts(&self, c: &[f64], d: &[f64]) -> Parts {
        let v = self.pinv.matvec(c);
        let w = self.project_residual(c);
        Parts {
            gamma: 1.0 + dot(d, &v),
            ev: dot(&self.q, c),
            ep: dot(&self.ae, d),
            wy: dot(&self.residual, c),
            ny: dot(&self.beta0, d),
            ww: dot(&w, &w),
            nn: self.gram_inv.quad_form(d),
        }
    }

    /// h(c, d) = eᵀ G y, the change eᵀ(β̂ − β₀) caused by X → X + c dᵀ.
    pub fn objective(&self, c: &[f64], d: &[f64]) -> f64 {
        let p = self.parts(c, d);
        p.numerator() / p.denominator()
    }

    /// (∂h/∂c, ∂h/∂d)
    pub fn gradient(&self, c: &[f64], d: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let p = self.parts(c, d);
        let num = p.numerator();
        let den = p.denominator();
        let h = num / den;
        // derivatives of the scalars
        let dgamma_c = self.pinv.tr_matvec(d);
        let dgamma_d = self.pinv.matvec(c);
        let dww_c = matkit::scaled(2.0, &self.project_residual(c));
        let dnn_d = matkit::scaled(2.0, &self.gram_inv.matvec(d));
        // ∂N/∂s for each scalar s
        let n_gamma = p.ep * p.wy - p.ev * p.ny;
        let n_ep = p.gamma * p.wy - p.ww * p.ny;
        let n_wy = p.gamma * p.ep - p.nn * p.ev;
        let n_ny = -p.ww * p.ep - p.gamma * p.ev;
        let n_ww = -p.ep * p.ny;
        let n_nn = -p.ev * p.wy;
        let n_ev = -p.nn * p.wy - p.gamma * p.ny;
        // ∂D/∂s
        let d_gamma = 2.0 * p.gamma;
        let d_ww = p.nn;
        let d_nn = p.ww;

        let mut gc = vec![0.0; c.len()];
        matkit::axpy(n_gamma - h * d_gamma, &dgamma_c, &mut gc);
        matkit::axpy(n_wy, &self.residual, &mut gc);
        matkit::axpy(n_ev, &self.q, &mut gc);
        matkit::axpy(n_ww - h * d_ww, &dww_c, &mut gc);
        gc.iter_mut().for_each(|v| *v /= den);

        let mut gd = vec![0.0; d.len()];
        matkit::axpy(n_gamma - h * d_gamma, &dgamma_d, &mut gd);
        matkit::axpy(n_ep, &self.ae, &mut gd);
        matkit::axpy(n_ny, &self.beta0, &mut gd);
        matkit::axpy(n_nn - h * d_nn, &dnn_d, &mut gd);
        gd.iter_mut().for_each(|v| *v /= den);
        (gc, gd)
    }

    /// Coordinates of c in the reduced c-space, chosen so that h and ‖c‖ are
    /// preserved: column-space part, residual-direction part, then the norm
    /// of whatever is left.
    fn reduce_c(&self, c: &[f64]) -> Vec<f64> {
        let mut a = self.u1.tr_matvec(c);
        let mut rest = self.project_residual(c);
        if let Some(r) = self.extra.first().filter(|_| self.has_residual) {
            let t = dot(r, &rest);
            matkit::axpy(-t, r, &mut rest);
            a.push(t);
        }
        if self.reduced_dim() > a.len() {
            a.push(norm(&rest));
        }
        a
    }

    fn reduced_dim(&self) -> usize {
        self.m() + self.extra.len()
    }

    fn expand_c(&self, a: &[f64]) -> Vec<f64> {
        let m = self.m();
        let mut c = self.u1.matvec(&a[..m]);
        for (k, z) in self.extra.iter().enumerate() {
            matkit::axpy(a[m + k], z, &mut c);
        }
        c
    }

    /// Ratio coefficients for the c-problem in the reduced basis.
    fn reduced_c_coeffs(&self, d: &[f64]) -> RatioCoeffs {
        let k = self.reduced_dim();
        let m = self.m();
        let project = |v: &[f64]| -> Vec<f64> {
            let mut out = self.u1.tr_matvec(v);
            for z in &self.extra {
                out.push(dot(z, v));
            }
            out
        };
        let nvec = self.pinv.tr_matvec(d);
        let p_red = Matrix::from_fn(k, k, |i, j| if i == j && i >= m { 1.0 } else { 0.0 });
        c_coeffs(
            &project(&nvec),
            &project(&self.q),
            &project(&self.residual),
            &p_red,
            dot(&self.ae, d),
            dot(&self.beta0, d),
            self.gram_inv.quad_form(d),
        )
    }
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let p = dot(b, v);
            matkit::axpy(-p, b, v);
        }
    }
}

/// G with (X + c dᵀ)† = X† + G, by the four-way case split on ‖w‖ and γ.
pub fn pinv_update(fit: &RegressionFit, c: &[f64], d: &[f64]) -> Result<Matrix> {
    let (n, m) = (fit.n(), fit.m());
    if c.len() != n || d.len() != m {
        return Err(Error::Dimension(format!(
            "c has {} entries (want {n}), d has {} (want {m})",
            c.len(),
            d.len()
        )));
    }
    let xp = &fit.pinv;
    let v = xp.matvec(c);
    let nvec = xp.tr_matvec(d);
    let w = fit.proj_residual.matvec(c);
    let gamma = 1.0 + dot(d, &v);
    let w_zero = norm(&w) <= 1e-10 * norm(c);
    let g_zero = gamma.abs() <= 1e-10;
    let ww = dot(&w, &w);
    let nn = dot(&nvec, &nvec);
    let xn = xp.matvec(&nvec);
    let g = match (w_zero, g_zero) {
        (true, false) => Matrix::outer(&v, &nvec).scale(-1.0 / gamma),
        (false, true) => {
            let mut g = Matrix::outer(&xn, &nvec).scale(-1.0 / nn);
            g.add_scaled(-1.0 / ww, &Matrix::outer(&v, &w));
            g
        }
        (false, false) => {
            let mut g = Matrix::outer(&xn, &w).scale(1.0 / gamma);
            let left: Vec<f64> = xn.iter().zip(&v).map(|(a, b)| ww / gamma * a + b).collect();
            let right: Vec<f64> = w.iter().zip(&nvec).map(|(a, b)| nn / gamma * a + b).collect();
            g.add_scaled(-gamma / (nn * ww + gamma * gamma), &Matrix::outer(&left, &right));
            g
        }
        (true, true) => {
            let vv = dot(&v, &v);
            let vvt_xp = Matrix::outer(&v, &v).matmul(xp);
            let mut g = vvt_xp.scale(-1.0 / vv);
            g.add_scaled(-1.0 / nn, &Matrix::outer(&xn, &nvec));
            g.add_scaled(dot(&v, &xn) / (vv * nn), &Matrix::outer(&v, &nvec));
            g
        }
    };
    Ok(g)
}

/// h(x) = (xᵀA₁x + 2b₁ᵀx + l₁) / (xᵀA₂x + 2b₂ᵀx + l₂)
#[derive(Clone, Debug)]
pub struct RatioCoeffs {
    pub a1: Matrix,
    pub b1: Vec<f64>,
    pub l1: f64,
    pub a2: Matrix,
    pub b2: Vec<f64>,
    pub l2: f64,
}

impl RatioCoeffs {
    pub fn dim(&self) -> usize {
        self.b1.len()
    }

    pub fn numerator(&self, x: &[f64]) -> f64 {
        self.a1.quad_form(x) + 2.0 * dot(&self.b1, x) + self.l1
    }

    pub fn denominator(&self, x: &[f64]) -> f64 {
        self.a2.quad_form(x) + 2.0 * dot(&self.b2, x) + self.l2
    }

    pub fn ratio(&self, x: &[f64]) -> f64 {
        self.numerator(x) / self.denominator(x)
    }

    /// [[A, b], [bᵀ, l]] for the numerator and denominator.
    fn bordered(a: &Matrix, b: &[f64], l: f64) -> Matrix {
        let k = b.len();
        Matrix::from_fn(k + 1, k + 1, |i, j| match (i < k, j < k) {
            (true, true) => a[(i, j)],
            (true, false) => b[i],
            (false, true) => b[j],
            (false, false) => l,
        })
    }
}

fn sym_outer(u: &[f64], v: &[f64]) -> Matrix {
    let mut m = Matrix::outer(u, v);
    m.add_scaled(1.0, &Matrix::outer(v, u));
    m.scale(0.5)
}

/// c-problem coefficients from the vectors n = X†ᵀd, q = X†ᵀe, r = Py and
/// the projector P, all expressed in one common basis.
fn c_coeffs(nvec: &[f64], q: &[f64], r: &[f64], p: &Matrix, ep: f64, ny: f64, nn: f64) -> RatioCoeffs {
    let mut a1 = sym_outer(nvec, r).scale(ep);
    a1.add_scaled(-ep * ny, p);
    a1.add_scaled(-nn, &sym_outer(q, r));
    a1.add_scaled(-ny, &sym_outer(nvec, q));
    let b1 = r.iter().zip(q).map(|(ri, qi)| 0.5 * (ep * ri - ny * qi)).collect();
    let mut a2 = p.scale(nn);
    a2.add_scaled(1.0, &Matrix::outer(nvec, nvec));
    RatioCoeffs {
        a1: a1.symmetrized(),
        b1,
        l1: 0.0,
        a2: a2.symmetrized(),
        b2: nvec.to_vec(),
        l2: 1.0,
    }
}

/// Variable held fixed when forming a ratio subproblem.
#[derive(Clone, Copy, Debug)]
pub enum Fixed<'a> {
    C(&'a [f64]),
    D(&'a [f64]),
}

/// Full-space coefficients of h as a ratio of quadratics in the free variable.
pub fn ratio_coeffs(ctx: &RankOneContext, fixed: Fixed<'_>) -> Result<RatioCoeffs> {
    match fixed {
        Fixed::D(d) => {
            if d.len() != ctx.m() {
                return Err(Error::Dimension("fixed d has the wrong length".into()));
            }
            let n = ctx.n();
            let mut p = Matrix::identity(n);
            p.add_scaled(-1.0, &ctx.u1.matmul(&ctx.u1.transpose()));
            Ok(c_coeffs(
                &ctx.pinv.tr_matvec(d),
                &ctx.q,
                &ctx.residual,
                &p,
                dot(&ctx.ae, d),
                dot(&ctx.beta0, d),
                ctx.gram_inv.quad_form(d),
            ))
        }
        Fixed::C(c) => {
            if c.len() != ctx.n() {
                return Err(Error::Dimension("fixed c has the wrong length".into()));
            }
            Ok(d_coeffs(ctx, c))
        }
    }
}

fn d_coeffs(ctx: &RankOneContext, c: &[f64]) -> RatioCoeffs {
    let v = ctx.pinv.matvec(c);
    let w = ctx.project_residual(c);
    let ww = dot(&w, &w);
    let wy = dot(&ctx.residual, c);
    let ev = dot(&ctx.q, c);
    let mut a1 = sym_outer(&v, &ctx.ae).scale(wy);
    a1.add_scaled(-ww, &sym_outer(&ctx.ae, &ctx.beta0));
    a1.add_scaled(-ev * wy, &ctx.gram_inv);
    a1.add_scaled(-ev, &sym_outer(&v, &ctx.beta0));
    let b1 = ctx.ae.iter().zip(&ctx.beta0).map(|(a, b)| 0.5 * (wy * a - ev * b)).collect();
    let mut a2 = ctx.gram_inv.scale(ww);
    a2.add_scaled(1.0, &Matrix::outer(&v, &v));
    RatioCoeffs {
        a1: a1.symmetrized(),
        b1,
        l1: 0.0,
        a2: a2.symmetrized(),
        b2: v,
        l2: 1.0,
    }
}

#[derive(Clone, Debug)]
pub struct RatioSolution {
    pub x: Vec<f64>,
    /// h at `x`
    pub value: f64,
    /// largest α certified by the LMI, a lower bound on the minimum
    pub dual_bound: f64,
    pub nu: f64,
}

/// max over ν ≥ 0 of λ_min(M₁ − αM₂ + νJ), stopping early once it is ≥ 0.
fn best_margin(m1: &Matrix, m2: &Matrix, j: &Matrix, alpha: f64, tol: f64) -> Result<(f64, f64)> {
    let base = affine(m1, m2, alpha);
    let phi = |nu: f64| min_eig_affine(&base, std::slice::from_ref(j), &[nu]);
    let f0 = phi(0.0)?;
    if f0 >= 0.0 {
        return Ok((f0, 0.0));
    }
    // grow the right end until λ_min has started to fall
    let mut hi = 1.0;
    let mut f_hi = phi(hi)?;
    let mut f_mid = phi(0.5 * hi)?;
    let mut doublings = 0;
    while f_hi > f_mid && f_hi < 0.0 {
        hi *= 2.0;
        f_mid = f_hi;
        f_hi = phi(hi)?;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::Numerical("multiplier search did not turn".into()));
        }
    }
    if f_hi >= 0.0 {
        return Ok((f_hi, hi));
    }
    if f_mid >= 0.0 {
        return Ok((f_mid, 0.5 * hi));
    }
    // golden section on the concave function over [0, hi]
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, hi);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = phi(x1)?;
    let mut f2 = phi(x2)?;
    while b - a > tol * (1.0 + b) {
        if f1.max(f2) >= 0.0 {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = phi(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = phi(x1)?;
        }
    }
    Ok(if f1 >= f2 { (f1, x1) } else { (f2, x2) })
}

fn affine(m1: &Matrix, m2: &Matrix, alpha: f64) -> Matrix {
    let mut m = m1.clone();
    m.add_scaled(-alpha, m2);
    m
}

/// Global minimum of the ratio over ‖x‖ ≤ radius: bisection on the LMI
/// multiplier α, then trust-region recovery of the minimizer.
pub fn solve_ratio_subproblem(rc: &RatioCoeffs, radius: f64) -> Result<RatioSolution> {
    solve_ratio_subproblem_from(rc, radius, &vec![0.0; rc.dim()])
}

/// As `solve_ratio_subproblem`, bracketing from the ratio at a feasible anchor.
pub fn solve_ratio_subproblem_from(rc: &RatioCoeffs, radius: f64, anchor: &[f64]) -> Result<RatioSolution> {
    let k = rc.dim();
    if anchor.len() != k || !(radius > 0.0) {
        return Err(Error::InvalidArgument("bad anchor or radius for the ratio subproblem".into()));
    }
    if norm(anchor) > radius * (1.0 + 1e-12) || rc.denominator(anchor) <= 0.0 {
        return Err(Error::InvalidArgument("anchor is not a feasible point".into()));
    }
    let m1 = RatioCoeffs::bordered(&rc.a1, &rc.b1, rc.l1);
    let m2 = RatioCoeffs::bordered(&rc.a2, &rc.b2, rc.l2);
    let j = Matrix::from_fn(k + 1, k + 1, |i, jj| match (i == jj, i < k) {
        (true, true) => 1.0,
        (true, false) => -radius * radius,
        _ => 0.0,
    });
    let scale = 1.0 + m1.max_abs() + m2.max_abs();
    let feasible = |alpha: f64| -> Result<Option<f64>> {
        let (margin, nu) = best_margin(&m1, &m2, &j, alpha, 1e-12)?;
        Ok((margin >= -1e-13 * scale).then_some(nu))
    };

    let top = rc.ratio(anchor);
    let mut hi = top;
    let mut width = 10.0;
    let mut lo = top - width;
    let mut nu_lo = loop {
        if let Some(nu) = feasible(lo)? {
            break nu;
        }
        hi = lo;
        width *= 2.0;
        lo = top - width;
        if width > 1e12 * (1.0 + top.abs()) {
            return Err(Error::Numerical(format!(
                "no feasible multiplier below {top:e}; bracket widened to {width:e}"
            )));
        }
    };
    while hi - lo > 1e-11 * (1.0 + lo.abs()) {
        let mid = 0.5 * (lo + hi);
        match feasible(mid)? {
            Some(nu) => {
                lo = mid;
                nu_lo = nu;
            }
            None => hi = mid,
        }
    }

    // minimizer of h₁ − α h₂, then Dinkelbach steps to land on the ratio exactly
    let mut alpha = lo;
    let mut best_x = anchor.to_vec();
    let mut best_val = top;
    for _ in 0..30 {
        let mut a = rc.a1.clone();
        a.add_scaled(-alpha, &rc.a2);
        let b: Vec<f64> = rc.b1.iter().zip(&rc.b2).map(|(p, q)| p - alpha * q).collect();
        let tr = trust_region(&a, &b, radius)?;
        let val = rc.ratio(&tr.x_star);
        if val < best_val {
            let drop = best_val - val;
            best_val = val;
            best_x = tr.x_star;
            alpha = val;
            if drop <= 1e-15 * (1.0 + val.abs()) {
                break;
            }
        } else {
            break;
        }
    }
    if best_val - lo > 1e-6 * (1.0 + best_val.abs()) {
        log::warn!("ratio subproblem: value {best_val:e} sits {:e} above its dual bound", best_val - lo);
    }
    Ok(RatioSolution {
        x: best_x,
        value: best_val,
        dual_bound: lo,
        nu: nu_lo,
    })
}

/// Δ = c dᵀ with its objective trace.
#[derive(Clone, Debug)]
pub struct RankOnePerturbation {
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub objective: f64,
    /// objective after initialization and after every full c/d sweep
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl RankOnePerturbation {
    /// ‖c dᵀ‖_F
    pub fn energy(&self) -> f64 {
        norm(&self.c) * norm(&self.d)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AltOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for AltOptions {
    fn default() -> Self {
        AltOptions {
            tol: 1e-9,
            max_iter: 10_000,
        }
    }
}

/// Uniform sample from the ball of the given radius.
pub fn uniform_ball(rng: &mut impl Rng, dim: usize, radius: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let nv = norm(&v);
    let r = radius * rng.random_range(0.0f64..1.0).powf(1.0 / dim as f64);
    v.iter_mut().for_each(|x| *x *= r / nv);
    v
}

/// Seeded starting pair: c uniform in the unit ball, d uniform in the η-ball.
pub fn random_start(ctx: &RankOneContext, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let c = uniform_ball(&mut rng, ctx.n(), 1.0);
    let d = uniform_ball(&mut rng, ctx.m(), ctx.eta);
    (c, d)
}

/// Alternating minimization over c (‖c‖ ≤ 1) and d (‖d‖ ≤ η).
pub fn alternating_attack(ctx: &RankOneContext, seed: u64, opts: &AltOptions) -> Result<RankOnePerturbation> {
    let (c0, d0) = random_start(ctx, seed);
    alternating_from(ctx, c0, d0, opts)
}

pub fn alternating_from(
    ctx: &RankOneContext,
    mut c: Vec<f64>,
    mut d: Vec<f64>,
    opts: &AltOptions,
) -> Result<RankOnePerturbation> {
    if let Some(cert) = check_unbounded_ctx(ctx) {
        return Err(Error::Unbounded {
            eta: ctx.eta,
            sigma_min: cert.sigma_min,
        });
    }
    if ctx.eta == 0.0 {
        return Ok(RankOnePerturbation {
            objective: ctx.objective(&c, &d),
            c,
            d,
            trace: vec![0.0],
            iterations: 0,
            converged: true,
        });
    }
    let mut h = ctx.objective(&c, &d);
    let mut trace = vec![h];
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..opts.max_iter {
        iterations += 1;
        let prev = h;

        let rc = ctx.reduced_c_coeffs(&d);
        let anchor = ctx.reduce_c(&c);
        let sol = solve_ratio_subproblem_from(&rc, 1.0, &anchor)?;
        let c_new = ctx.expand_c(&sol.x);
        let h_c = ctx.objective(&c_new, &d);
        if h_c <= h {
            c = c_new;
            h = h_c;
        }

        let rd = d_coeffs(ctx, &c);
        let sol = solve_ratio_subproblem_from(&rd, ctx.eta, &d)?;
        let h_d = ctx.objective(&c, &sol.x);
        if h_d <= h {
            d = sol.x;
            h = h_d;
        }

        trace.push(h);
        if (prev - h).abs() <= opts.tol * (1.0 + h.abs()) {
            converged = true;
            break;
        }
    }
    Ok(RankOnePerturbation {
        c,
        d,
        objective: h,
        trace,
        iterations,
        converged,
    })
}

/// (c, d) pair along which h diverges once η ≥ σ_m.
#[derive(Clone, Debug)]
pub struct UnboundedCertificate {
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub sigma_min: f64,
}

/// The pair (u_m, −σ_m v_m) when η ≥ σ_m.
pub fn check_unbounded(fit: &RegressionFit, eta: f64) -> Option<UnboundedCertificate> {
    let sigma = fit.sigma_min();
    if eta < sigma {
        return None;
    }
    let m = fit.m();
    Some(UnboundedCertificate {
        c: fit.svd.u.col(m - 1),
        d: matkit::scaled(-sigma, &fit.svd.v.col(m - 1)),
        sigma_min: sigma,
    })
}

fn check_unbounded_ctx(ctx: &RankOneContext) -> Option<UnboundedCertificate> {
    (ctx.eta >= ctx.sigma_min).then(|| UnboundedCertificate {
        c: Vec::new(),
        d: Vec::new(),
        sigma_min: ctx.sigma_min,
    })
}

/// Divergence probe along (u_m, −t v_m).
#[derive(Clone, Debug)]
pub struct DivergenceProbe {
    /// h at t = σ_m/2
    pub baseline: f64,
    /// t on the side of σ_m where h goes to −∞
    pub t: f64,
    pub value: f64,
}

/// Evaluates h at t = σ_m(1 ∓ 1e−4), taking the side on which h is
/// negative; needs η ≥ t for the probe point to be feasible.
pub fn divergence_probe(ctx: &RankOneContext, fit: &RegressionFit) -> Result<DivergenceProbe> {
    let sigma = fit.sigma_min();
    let m = fit.m();
    let u = fit.svd.u.col(m - 1);
    let v = fit.svd.v.col(m - 1);
    let at = |t: f64| ctx.objective(&u, &matkit::scaled(-t, &v));
    let baseline = at(0.5 * sigma);
    let below = at(sigma * (1.0 - 1e-4));
    let above = at(sigma * (1.0 + 1e-4));
    let (t, value) = if below <= above {
        (sigma * (1.0 - 1e-4), below)
    } else {
        (sigma * (1.0 + 1e-4), above)
    };
    if t > ctx.eta * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!("probe point t = {t:e} exceeds the budget {:e}", ctx.eta)));
    }
    Ok(DivergenceProbe { baseline, t, value })
}

/// min over sampled feasible (c, d) of ∇h(c̄, d̄)ᵀ[(c − c̄); (d − d̄)].
pub fn criticality_residual(ctx: &RankOneContext, c: &[f64], d: &[f64], samples: usize, seed: u64) -> f64 {
    let (gc, gd) = ctx.gradient(c, d);
    let base = dot(&gc, c) + dot(&gd, d);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let cs = uniform_ball(&mut rng, c.len(), 1.0);
        let ds = uniform_ball(&mut rng, d.len(), ctx.eta);
        worst = worst.min(dot(&gc, &cs) + dot(&gd, &ds) - base);
    }
    worst
}

/// Exact minimum of the same inner product over both balls.
pub fn criticality_bound(ctx: &RankOneContext, c: &[f64], d: &[f64]) -> f64 {
    let (gc, gd) = ctx.gradient(c, d);
    -norm(&gc) - ctx.eta * norm(&gd) - dot(&gc, c) - dot(&gd, d)
}
