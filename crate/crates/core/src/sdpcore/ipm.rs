//! Infeasible primal-dual path-following method for
//!
//!   min c^T y  s.t.  S_b = C_b + Σ_k y_k F_bk ⪰ 0
//!
//! paired with  max −Σ⟨C_b, X_b⟩  s.t.  Σ_b ⟨F_bk, X_b⟩ = c_k, X_b ⪰ 0.
//! HKM search direction with a Mehrotra predictor-corrector.

use super::dense::{cholesky_lower, cholesky_solve};
use super::problem::SdpProblem;
use crate::error::{Error, Result};
use crate::matkit::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

#[derive(Clone, Copy, Debug)]
pub struct SdpOptions {
    /// relative duality gap and primal residual target
    pub tol: f64,
    /// relative residual of the dual equalities ⟨F_k, X⟩ = c_k
    pub dual_tol: f64,
    pub max_iter: usize,
    /// fraction of the distance to the cone boundary taken per step
    pub step_fraction: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            tol: 1e-8,
            dual_tol: 1e-7,
            max_iter: 200,
            step_fraction: 0.95,
        }
    }
}

/// Per-iteration record.
#[derive(Clone, Copy, Debug)]
pub struct IterRecord {
    pub primal_obj: f64,
    pub dual_obj: f64,
    /// ⟨X, S⟩
    pub complementarity: f64,
    /// ‖C + Σ y F − S‖_F
    pub lmi_residual: f64,
    /// ‖c − ⟨F, X⟩‖
    pub equality_residual: f64,
    /// y^T (c − ⟨F,X⟩) + ⟨C + Σ y F − S, X⟩, the part of the gap not
    /// explained by ⟨X, S⟩
    pub gap_correction: f64,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub y_star: Vec<f64>,
    /// c^T y at `y_star`
    pub value: f64,
    pub dual_value: f64,
    pub status: SdpStatus,
    /// |primal − dual|
    pub duality_gap: f64,
    pub iterations: usize,
    pub lmi_residual: f64,
    pub equality_residual: f64,
    /// dual matrices X_b
    pub x_blocks: Vec<Matrix>,
    pub history: Vec<IterRecord>,
}

struct BlockData {
    dim: usize,
    constant: Matrix,
    /// variables present in this block, with their full (mirrored) entries
    vars: Vec<usize>,
    var_ptr: Vec<usize>,
    var_entries: Vec<(usize, usize, f64)>,
    /// upper positions with the variables that touch them
    positions: Vec<(usize, usize)>,
    pos_ptr: Vec<usize>,
    pos_entries: Vec<(usize, f64)>,
    /// merged upper-triangle coefficients (var, i, j, v)
    upper: Vec<(usize, usize, usize, f64)>,
}

impl BlockData {
    fn new(blk: &super::problem::LmiBlock) -> Self {
        let n = blk.dim;
        let mut constant = Matrix::zeros(n, n);
        for &(i, j, v) in &blk.constant {
            constant[(i, j)] += v;
            if i != j {
                constant[(j, i)] += v;
            }
        }
        let mut upper = blk.coeffs.clone();
        upper.sort_by_key(|a| (a.0, a.1, a.2));
        let mut merged: Vec<(usize, usize, usize, f64)> = Vec::with_capacity(upper.len());
        for e in upper {
            match merged.last_mut() {
                Some(last) if (last.0, last.1, last.2) == (e.0, e.1, e.2) => last.3 += e.3,
                _ => merged.push(e),
            }
        }
        merged.retain(|e| e.3 != 0.0);

        let mut vars = Vec::new();
        let mut var_ptr = vec![0];
        let mut var_entries = Vec::new();
        for e in &merged {
            if vars.last() != Some(&e.0) {
                if !vars.is_empty() {
                    var_ptr.push(var_entries.len());
                }
                vars.push(e.0);
            }
            var_entries.push((e.1, e.2, e.3));
            if e.1 != e.2 {
                var_entries.push((e.2, e.1, e.3));
            }
        }
        var_ptr.push(var_entries.len());
        if vars.is_empty() {
            var_ptr = vec![0];
        }

        let mut by_pos: Vec<(usize, usize, usize, f64)> =
            merged.iter().map(|&(k, i, j, v)| (i, j, k, v)).collect();
        by_pos.sort_by_key(|a| (a.0, a.1, a.2));
        let mut positions = Vec::new();
        let mut pos_ptr = vec![0];
        let mut pos_entries = Vec::new();
        for e in &by_pos {
            if positions.last() != Some(&(e.0, e.1)) {
                if !positions.is_empty() {
                    pos_ptr.push(pos_entries.len());
                }
                positions.push((e.0, e.1));
            }
            pos_entries.push((e.2, e.3));
        }
        pos_ptr.push(pos_entries.len());
        if positions.is_empty() {
            pos_ptr = vec![0];
        }

        BlockData {
            dim: n,
            constant,
            vars,
            var_ptr,
            var_entries,
            positions,
            pos_ptr,
            pos_entries,
            upper: merged,
        }
    }

    /// C + Σ y F
    fn eval(&self, y: &[f64]) -> Matrix {
        let mut m = self.constant.clone();
        self.add_linear(y, &mut m);
        m
    }

    /// m += Σ y F
    fn add_linear(&self, y: &[f64], m: &mut Matrix) {
        for &(k, i, j, v) in &self.upper {
            let t = v * y[k];
            m[(i, j)] += t;
            if i != j {
                m[(j, i)] += t;
            }
        }
    }

    /// out_k += ⟨F_k, Z⟩ for a possibly non-symmetric Z.
    fn add_inner(&self, z: &Matrix, out: &mut [f64]) {
        for &(k, i, j, v) in &self.upper {
            out[k] += if i == j { v * z[(i, i)] } else { v * (z[(i, j)] + z[(j, i)]) };
        }
    }

    fn coeff_norms(&self, nv: usize) -> Vec<f64> {
        let mut sq = vec![0.0; nv];
        for &(k, i, j, v) in &self.upper {
            sq[k] += if i == j { v * v } else { 2.0 * v * v };
        }
        sq.into_iter().map(f64::sqrt).collect()
    }

    /// Lower triangle of M_kl += tr(F_k X F_l S^{-1}).
    fn add_schur(&self, x: &Matrix, sinv: &Matrix, m: &mut [f64], nv: usize) {
        let n = self.dim;
        let mut w = vec![0.0; n * n];
        for (slot, &k) in self.vars.iter().enumerate() {
            w.iter_mut().for_each(|v| *v = 0.0);
            for &(i, j, v) in &self.var_entries[self.var_ptr[slot]..self.var_ptr[slot + 1]] {
                // W[q, :] += v S^{-1}[q, i] X[j, :]
                let xrow = x.row(j);
                let srow = sinv.row(i);
                for q in 0..n {
                    let s = v * srow[q];
                    if s != 0.0 {
                        crate::matkit::axpy(s, xrow, &mut w[q * n..(q + 1) * n]);
                    }
                }
            }
            for (pidx, &(p, q)) in self.positions.iter().enumerate() {
                let val = if p == q { w[p * n + p] } else { w[q * n + p] + w[p * n + q] };
                for &(l, coef) in &self.pos_entries[self.pos_ptr[pidx]..self.pos_ptr[pidx + 1]] {
                    if l >= k {
                        m[l * nv + k] += coef * val;
                    }
                }
            }
        }
    }
}

fn frob_inner(a: &Matrix, b: &Matrix) -> f64 {
    crate::matkit::dot(a.as_slice(), b.as_slice())
}

/// (Z + Z^T)/2
fn sym(z: Matrix) -> Matrix {
    z.symmetrized()
}

fn is_pd(a: &Matrix) -> bool {
    let n = a.rows();
    let mut buf = a.as_slice().to_vec();
    cholesky_lower(&mut buf, n).is_ok()
}

/// rhs − M v, with M symmetric and stored in its lower triangle.
fn lower_sym_residual(m: &[f64], n: usize, v: &[f64], rhs: &[f64]) -> Vec<f64> {
    let mut out = rhs.to_vec();
    for i in 0..n {
        let row = &m[i * n..i * n + i];
        out[i] -= crate::matkit::dot(row, &v[..i]) + m[i * n + i] * v[i];
        let vi = v[i];
        for (o, mij) in out[..i].iter_mut().zip(row) {
            *o -= mij * vi;
        }
    }
    out
}

fn spd_inverse(a: &Matrix) -> Option<Matrix> {
    let n = a.rows();
    let mut l = a.as_slice().to_vec();
    cholesky_lower(&mut l, n).ok()?;
    let mut inv = Matrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for c in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[c] = 1.0;
        cholesky_solve(&l, n, &mut e);
        inv.set_col(c, &e);
    }
    Some(inv.symmetrized())
}

/// Largest α in (0, 1] with a + α d ⪰ 0 (approximately, from below).
fn max_step(a: &Matrix, d: &Matrix) -> f64 {
    let trial = |alpha: f64| {
        let mut t = a.clone();
        t.add_scaled(alpha, d);
        is_pd(&t)
    };
    if trial(1.0) {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if trial(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-4 * hi {
            break;
        }
    }
    lo
}

pub fn solve_sdp(p: &SdpProblem) -> Result<SdpSolution> {
    solve_sdp_with(p, &SdpOptions::default())
}

pub fn solve_sdp_with(p: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    p.validate()?;
    let nv = p.dim_y;
    let blocks: Vec<BlockData> = p.blocks.iter().map(BlockData::new).collect();
    let total_dim: usize = blocks.iter().map(|b| b.dim).sum();
    if total_dim == 0 {
        return Err(Error::InvalidArgument("SDP without matrix blocks".into()));
    }
    let c = &p.cost;
    let c_norm = crate::matkit::norm(c);
    let const_norm = blocks.iter().map(|b| b.constant.frobenius().powi(2)).sum::<f64>().sqrt();

    let mut x: Vec<Matrix> = Vec::with_capacity(blocks.len());
    let mut s: Vec<Matrix> = Vec::with_capacity(blocks.len());
    for b in &blocks {
        let nb = b.dim as f64;
        let fnorm = b.coeff_norms(nv);
        let mut xi: f64 = 10.0f64.max(nb.sqrt());
        let mut eta: f64 = xi.max(b.constant.frobenius());
        for &k in &b.vars {
            xi = xi.max(nb * (1.0 + c[k].abs()) / (1.0 + fnorm[k]));
            eta = eta.max(fnorm[k]);
        }
        x.push(Matrix::identity(b.dim).scale(xi));
        s.push(Matrix::identity(b.dim).scale(eta));
    }
    let mut y = vec![0.0; nv];

    let mut history = Vec::new();
    let mut status = SdpStatus::MaxIter;
    let mut schur = vec![0.0; nv * nv];
    let mut best: Option<(f64, Vec<f64>, Vec<Matrix>, IterRecord)> = None;
    let mut iterations = 0;
    let mut small_steps = 0;

    for iter in 0..=opts.max_iter {
        iterations = iter;
        // residuals
        let rd: Vec<Matrix> = blocks.iter().zip(&s).map(|(b, sb)| b.eval(&y).sub(sb)).collect();
        let mut fx = vec![0.0; nv];
        for (b, xb) in blocks.iter().zip(&x) {
            b.add_inner(xb, &mut fx);
        }
        let rp: Vec<f64> = c.iter().zip(&fx).map(|(ci, fi)| ci - fi).collect();
        let pobj = crate::matkit::dot(c, &y);
        let dobj = -blocks.iter().zip(&x).map(|(b, xb)| frob_inner(&b.constant, xb)).sum::<f64>();
        let compl: f64 = x.iter().zip(&s).map(|(a, b)| frob_inner(a, b)).sum();
        let rd_norm = rd.iter().map(|m| m.frobenius().powi(2)).sum::<f64>().sqrt();
        let rp_norm = crate::matkit::norm(&rp);
        let correction = crate::matkit::dot(&y, &rp)
            + rd.iter().zip(&x).map(|(r, xb)| frob_inner(r, xb)).sum::<f64>();
        let rec = IterRecord {
            primal_obj: pobj,
            dual_obj: dobj,
            complementarity: compl,
            lmi_residual: rd_norm,
            equality_residual: rp_norm,
            gap_correction: correction,
        };
        history.push(rec);
        let pinf = rd_norm / (1.0 + const_norm);
        let dinf = rp_norm / (1.0 + c_norm);
        let gap_rel = (pobj - dobj).abs() / (1.0 + pobj.abs());
        let merit = gap_rel.max(pinf).max(dinf);
        if best.as_ref().is_none_or(|b| merit < b.0) {
            best = Some((merit, y.clone(), x.clone(), rec));
        }
        log::debug!(
            "sdp iter {iter}: p={pobj:.10e} d={dobj:.10e} gap={gap_rel:.2e} pinf={pinf:.2e} dinf={dinf:.2e}"
        );
        if gap_rel <= opts.tol && pinf <= opts.tol && dinf <= opts.dual_tol {
            status = SdpStatus::Optimal;
            break;
        }
        let ynorm = crate::matkit::norm_inf(&y);
        let xnorm = x.iter().map(Matrix::max_abs).fold(0.0, f64::max);
        if ynorm > 1e12 || xnorm > 1e12 {
            status = SdpStatus::Infeasible;
            break;
        }
        if iter == opts.max_iter || small_steps >= 5 {
            break;
        }
        let mu = compl / total_dim as f64;

        let Some(sinv) = s.iter().map(spd_inverse).collect::<Option<Vec<Matrix>>>() else {
            // roundoff pushed a slack block to the boundary; keep the best iterate
            log::warn!("sdp iter {iter}: slack matrix lost definiteness, stopping");
            break;
        };
        schur.iter_mut().for_each(|v| *v = 0.0);
        for (bi, b) in blocks.iter().enumerate() {
            b.add_schur(&x[bi], &sinv[bi], &mut schur, nv);
        }
        let diag_max = (0..nv).map(|k| schur[k * nv + k].abs()).fold(0.0, f64::max);
        let mut factor = schur.clone();
        let mut reg = 0.0;
        while cholesky_lower(&mut factor, nv).is_err() {
            reg = if reg == 0.0 { 1e-14 * diag_max.max(1e-300) } else { reg * 100.0 };
            if reg > 1e-4 * diag_max {
                return Err(Error::Numerical("Schur complement is not positive definite".into()));
            }
            factor.copy_from_slice(&schur);
            for k in 0..nv {
                factor[k * nv + k] += reg;
            }
        }

        // X Rd S^{-1} is shared by both solves
        let x_rd_sinv: Vec<Matrix> = (0..blocks.len())
            .map(|bi| x[bi].matmul(&rd[bi]).matmul(&sinv[bi]))
            .collect();

        let direction = |target: f64, corr: Option<&[Matrix]>| -> (Vec<f64>, Vec<Matrix>, Vec<Matrix>) {
            let mut rhs: Vec<f64> = c.iter().map(|v| -v).collect();
            let mut r_blocks = Vec::with_capacity(blocks.len());
            for bi in 0..blocks.len() {
                let mut r = sinv[bi].scale(target);
                r.add_scaled(-1.0, &x_rd_sinv[bi]);
                if let Some(cb) = corr {
                    r.add_scaled(-1.0, &cb[bi]);
                }
                blocks[bi].add_inner(&r, &mut rhs);
                r_blocks.push(r);
            }
            let mut dy = rhs.clone();
            cholesky_solve(&factor, nv, &mut dy);
            // refinement against the unregularized matrix
            for _ in 0..2 {
                let mut resid = lower_sym_residual(&schur, nv, &dy, &rhs);
                cholesky_solve(&factor, nv, &mut resid);
                crate::matkit::axpy(1.0, &resid, &mut dy);
            }
            let mut ds = Vec::with_capacity(blocks.len());
            let mut dx = Vec::with_capacity(blocks.len());
            for bi in 0..blocks.len() {
                let mut dsb = rd[bi].clone();
                blocks[bi].add_linear(&dy, &mut dsb);
                // ΔX = target S^{-1} − X − sym(X ΔS S^{-1}) − sym(corr)
                let mut dxb = sinv[bi].scale(target);
                dxb.add_scaled(-1.0, &x[bi]);
                dxb.add_scaled(-1.0, &sym(x[bi].matmul(&dsb).matmul(&sinv[bi])));
                if let Some(cb) = corr {
                    dxb.add_scaled(-1.0, &sym(cb[bi].clone()));
                }
                ds.push(dsb);
                dx.push(dxb.symmetrized());
            }
            (dy, dx, ds)
        };

        // predictor
        let (_, dx_a, ds_a) = direction(0.0, None);
        let ap = (0..blocks.len()).map(|bi| max_step(&x[bi], &dx_a[bi])).fold(1.0, f64::min);
        let ad = (0..blocks.len()).map(|bi| max_step(&s[bi], &ds_a[bi])).fold(1.0, f64::min);
        let mut mu_aff = 0.0;
        for bi in 0..blocks.len() {
            let mut xa = x[bi].clone();
            xa.add_scaled(ap, &dx_a[bi]);
            let mut sa = s[bi].clone();
            sa.add_scaled(ad, &ds_a[bi]);
            mu_aff += frob_inner(&xa, &sa);
        }
        mu_aff /= total_dim as f64;
        let sigma = if mu > 0.0 { (mu_aff / mu).max(0.0).powi(3).min(1.0) } else { 0.0 };

        // corrector
        let corr: Vec<Matrix> = (0..blocks.len())
            .map(|bi| dx_a[bi].matmul(&ds_a[bi]).matmul(&sinv[bi]))
            .collect();
        let (dy, dx, ds) = direction(sigma * mu, Some(&corr));
        let ap = (0..blocks.len()).map(|bi| max_step(&x[bi], &dx[bi])).fold(1.0, f64::min);
        let ad = (0..blocks.len()).map(|bi| max_step(&s[bi], &ds[bi])).fold(1.0, f64::min);
        let ap = (opts.step_fraction * ap).min(1.0);
        let ad = (opts.step_fraction * ad).min(1.0);
        if ap.min(ad) < 1e-8 {
            small_steps += 1;
        } else {
            small_steps = 0;
        }
        for bi in 0..blocks.len() {
            x[bi].add_scaled(ap, &dx[bi]);
            s[bi].add_scaled(ad, &ds[bi]);
        }
        crate::matkit::axpy(ad, &dy, &mut y);
    }

    let mut last = history.last().copied().expect("at least one iterate");
    if status == SdpStatus::MaxIter {
        if let Some((_, by, bx, rec)) = best {
            y = by;
            x = bx;
            last = rec;
        }
    }
    let value = crate::matkit::dot(c, &y);
    let dual_value = -blocks.iter().zip(&x).map(|(b, xb)| frob_inner(&b.constant, xb)).sum::<f64>();
    Ok(SdpSolution {
        y_star: y,
        value,
        dual_value,
        status,
        duality_gap: (value - dual_value).abs(),
        iterations,
        lmi_residual: last.lmi_residual,
        equality_residual: last.equality_residual,
        x_blocks: x,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::super::problem::LmiBlock;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn two_by_two_boundary() {
        let mut blk = LmiBlock::new(2);
        blk.add_constant(0, 0, 1.0);
        blk.add_constant(1, 1, 1.0);
        blk.add_coeff(0, 0, 1, 1.0);
        let p = SdpProblem {
            dim_y: 1,
            cost: vec![1.0],
            blocks: vec![blk],
        };
        let s = solve_sdp(&p).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.value + 1.0).abs() < 1e-7, "{}", s.value);
    }

    #[test]
    fn trace_with_pinned_corner() {
        // Y = [[1, y0], [y0, y1]], minimize tr Y = 1 + y1
        let mut blk = LmiBlock::new(2);
        blk.add_constant(0, 0, 1.0);
        blk.add_coeff(0, 0, 1, 1.0);
        blk.add_coeff(1, 1, 1, 1.0);
        let p = SdpProblem {
            dim_y: 2,
            cost: vec![0.0, 1.0],
            blocks: vec![blk],
        };
        let s = solve_sdp(&p).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((1.0 + s.value - 1.0).abs() < 1e-7);
        assert!(s.duality_gap <= 1e-8 * (1.0 + s.value.abs()));
        assert!(p.min_block_eig(&s.y_star).unwrap() >= -1e-8);
    }

    fn random_problem(nv: usize, dims: &[usize], seed: u64) -> SdpProblem {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut blocks = Vec::new();
        let mut cost = vec![0.0; nv];
        for &d in dims {
            let mut blk = LmiBlock::new(d);
            // C = I keeps y = 0 strictly feasible
            for i in 0..d {
                blk.add_constant(i, i, 1.0);
            }
            // X0 = I + small noise gives cost_k = ⟨F_k, X0⟩, so the dual is feasible
            let x0 = {
                let e = Matrix::from_fn(d, d, |_, _| rng.random_range(-0.2..0.2));
                let mut m = e.tr_matmul(&e);
                for i in 0..d {
                    m[(i, i)] += 1.0;
                }
                m
            };
            for k in 0..nv {
                for i in 0..d {
                    for j in i..d {
                        if rng.random_range(0.0..1.0) < 0.5 {
                            let v = rng.random_range(-1.0..1.0);
                            blk.add_coeff(k, i, j, v);
                            cost[k] += if i == j { v * x0[(i, i)] } else { 2.0 * v * x0[(i, j)] };
                        }
                    }
                }
            }
            blocks.push(blk);
        }
        SdpProblem {
            dim_y: nv,
            cost,
            blocks,
        }
    }

    /// Primal log-barrier with damped Newton steps on t c^T y − log det S(y).
    fn barrier_oracle(p: &SdpProblem) -> f64 {
        let nv = p.dim_y;
        let mut y = vec![0.0; nv];
        let total: usize = p.blocks.iter().map(|b| b.dim).sum();
        let mut t = 1.0;
        let dense_f: Vec<Vec<Matrix>> = p
            .blocks
            .iter()
            .map(|b| {
                (0..nv)
                    .map(|k| {
                        let mut m = Matrix::zeros(b.dim, b.dim);
                        for &(v, i, j, c) in &b.coeffs {
                            if v == k {
                                m[(i, j)] += c;
                                if i != j {
                                    m[(j, i)] += c;
                                }
                            }
                        }
                        m
                    })
                    .collect()
            })
            .collect();
        let feasible = |y: &[f64]| p.blocks.iter().all(|b| crate::matkit::chol(&b.eval(y)).is_ok());
        while (total as f64) / t > 1e-9 {
            for _ in 0..100 {
                let mut g: Vec<f64> = p.cost.iter().map(|c| t * c).collect();
                let mut h = Matrix::zeros(nv, nv);
                for (bi, b) in p.blocks.iter().enumerate() {
                    let s = b.eval(&y);
                    let u = crate::matkit::chol(&s).unwrap();
                    let uinv_t: Vec<Vec<f64>> = (0..b.dim)
                        .map(|c| {
                            let mut e = vec![0.0; b.dim];
                            e[c] = 1.0;
                            crate::matkit::solve_upper(&u, &crate::matkit::solve_lower_transposed(&u, &e))
                        })
                        .collect();
                    let sinv = Matrix::from_fn(b.dim, b.dim, |i, j| uinv_t[j][i]);
                    let sf: Vec<Matrix> = dense_f[bi].iter().map(|f| sinv.matmul(f)).collect();
                    for k in 0..nv {
                        g[k] -= sf[k].trace();
                        for l in 0..nv {
                            h[(k, l)] += crate::matkit::dot(sf[k].as_slice(), sf[l].transpose().as_slice());
                        }
                    }
                }
                let step = crate::matkit::solve_spd(&h.symmetrized(), &g).unwrap();
                let dec = crate::matkit::dot(&g, &step);
                let mut a = 1.0;
                loop {
                    let trial: Vec<f64> = y.iter().zip(&step).map(|(a0, s)| a0 - a * s).collect();
                    if feasible(&trial) {
                        y = trial;
                        break;
                    }
                    a *= 0.5;
                }
                if dec < 1e-20 {
                    break;
                }
            }
            t *= 4.0;
        }
        p.objective(&y)
    }

    #[test]
    fn random_ten_variable_problem_matches_barrier_oracle() {
        for seed in 0..3 {
            let p = random_problem(10, &[4, 3], seed);
            let s = solve_sdp(&p).unwrap();
            assert_eq!(s.status, SdpStatus::Optimal);
            let oracle = barrier_oracle(&p);
            assert!((s.value - oracle).abs() < 1e-4, "{} vs {oracle}", s.value);
            assert!(p.min_block_eig(&s.y_star).unwrap() >= -1e-8);
        }
    }

    #[test]
    fn gap_identity_and_weak_duality() {
        let p = random_problem(6, &[5], 9);
        let s = solve_sdp(&p).unwrap();
        for rec in &s.history {
            let lhs = rec.primal_obj - rec.dual_obj;
            let rhs = rec.complementarity + rec.gap_correction;
            assert!((lhs - rhs).abs() <= 1e-8 * (1.0 + lhs.abs() + rec.complementarity));
            assert!(lhs >= -1e-7 - rec.gap_correction.abs());
        }
        assert!(s.value >= s.dual_value - 1e-7);
    }

    #[test]
    fn unbounded_is_flagged() {
        // min y s.t. y ≥ 0 written as [1 + 0·y] ⪰ 0 has no lower bound
        let mut blk = LmiBlock::new(1);
        blk.add_constant(0, 0, 1.0);
        blk.add_coeff(0, 0, 0, 1.0);
        let p = SdpProblem {
            dim_y: 1,
            cost: vec![-1.0],
            blocks: vec![blk],
        };
        let s = solve_sdp(&p).unwrap();
        assert_ne!(s.status, SdpStatus::Optimal);
    }
}
