//! Blocked Cholesky for the dense Schur complement. Row-major storage, lower
//! triangle; the strict upper triangle is scratch.

const NB: usize = 64;
const MR: usize = 4;
const NR: usize = 8;

/// In-place lower Cholesky of the n×n row-major matrix `a`. On failure returns
/// the index of the first non-positive pivot.
pub fn cholesky_lower(a: &mut [f64], n: usize) -> Result<(), usize> {
    assert_eq!(a.len(), n * n);
    let mut pa: Vec<f64> = Vec::new();
    let mut pb: Vec<f64> = Vec::new();
    let mut k0 = 0;
    while k0 < n {
        let kb = NB.min(n - k0);
        factor_diagonal(a, n, k0, kb)?;
        let r0 = k0 + kb;
        if r0 < n {
            solve_panel(a, n, k0, kb, r0);
            pack(a, n, k0, kb, r0, &mut pa, &mut pb);
            update_trailing(a, n, kb, r0, &pa, &pb);
        }
        k0 += kb;
    }
    Ok(())
}

fn factor_diagonal(a: &mut [f64], n: usize, k0: usize, kb: usize) -> Result<(), usize> {
    for j in k0..k0 + kb {
        let mut d = a[j * n + j];
        for t in k0..j {
            d -= a[j * n + t] * a[j * n + t];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(j);
        }
        let ljj = d.sqrt();
        a[j * n + j] = ljj;
        for i in (j + 1)..k0 + kb {
            let mut s = a[i * n + j];
            for t in k0..j {
                s -= a[i * n + t] * a[j * n + t];
            }
            a[i * n + j] = s / ljj;
        }
    }
    Ok(())
}

/// Rows below the diagonal block: L21 = A21 L11^{-T}.
fn solve_panel(a: &mut [f64], n: usize, k0: usize, kb: usize, r0: usize) {
    for i in r0..n {
        for j in 0..kb {
            let jj = k0 + j;
            let mut s = a[i * n + jj];
            for t in 0..j {
                s -= a[i * n + k0 + t] * a[jj * n + k0 + t];
            }
            a[i * n + jj] = s / a[jj * n + jj];
        }
    }
}

/// Packs the panel into MR- and NR-wide strips, each stored t-major.
fn pack(a: &[f64], n: usize, k0: usize, kb: usize, r0: usize, pa: &mut Vec<f64>, pb: &mut Vec<f64>) {
    let rem = n - r0;
    let strips_a = rem.div_ceil(MR);
    let strips_b = rem.div_ceil(NR);
    pa.clear();
    pa.resize(strips_a * kb * MR, 0.0);
    pb.clear();
    pb.resize(strips_b * kb * NR, 0.0);
    for r in 0..rem {
        let row = &a[(r0 + r) * n + k0..(r0 + r) * n + k0 + kb];
        let (sa, la) = (r / MR, r % MR);
        let (sb, lb) = (r / NR, r % NR);
        for (t, &v) in row.iter().enumerate() {
            pa[sa * kb * MR + t * MR + la] = v;
            pb[sb * kb * NR + t * NR + lb] = v;
        }
    }
}

fn update_trailing(a: &mut [f64], n: usize, kb: usize, r0: usize, pa: &[f64], pb: &[f64]) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx2") && std::arch::is_x86_feature_detected!("fma") {
            // SAFETY: the required CPU features were just detected.
            unsafe { update_trailing_fma(a, n, kb, r0, pa, pb) };
            return;
        }
    }
    update_trailing_plain(a, n, kb, r0, pa, pb);
}

macro_rules! trailing_body {
    ($a:ident, $n:ident, $kb:ident, $r0:ident, $pa:ident, $pb:ident, $fma:expr) => {{
        let rem = $n - $r0;
        for si in 0..rem.div_ceil(MR) {
            let i0 = si * MR;
            let a_strip = &$pa[si * $kb * MR..(si + 1) * $kb * MR];
            // lower triangle only: column strips up to the one holding row i0+MR-1
            let last_col = (i0 + MR - 1).min(rem - 1);
            for sj in 0..=last_col / NR {
                let j0 = sj * NR;
                let b_strip = &$pb[sj * $kb * NR..(sj + 1) * $kb * NR];
                let mut acc = [[0.0f64; NR]; MR];
                for t in 0..$kb {
                    let av: &[f64; MR] = a_strip[t * MR..t * MR + MR].try_into().unwrap();
                    let bv: &[f64; NR] = b_strip[t * NR..t * NR + NR].try_into().unwrap();
                    for r in 0..MR {
                        for c in 0..NR {
                            acc[r][c] = $fma(av[r], bv[c], acc[r][c]);
                        }
                    }
                }
                for r in 0..MR {
                    let i = i0 + r;
                    if i >= rem {
                        break;
                    }
                    let row = &mut $a[($r0 + i) * $n + $r0..($r0 + i + 1) * $n];
                    let cmax = NR.min(i + 1 - j0.min(i + 1)).min(rem - j0);
                    for c in 0..cmax {
                        row[j0 + c] -= acc[r][c];
                    }
                }
            }
        }
    }};
}

fn update_trailing_plain(a: &mut [f64], n: usize, kb: usize, r0: usize, pa: &[f64], pb: &[f64]) {
    trailing_body!(a, n, kb, r0, pa, pb, |x: f64, y: f64, z: f64| x * y + z)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2,fma")]
unsafe fn update_trailing_fma(a: &mut [f64], n: usize, kb: usize, r0: usize, pa: &[f64], pb: &[f64]) {
    trailing_body!(a, n, kb, r0, pa, pb, |x: f64, y: f64, z: f64| x.mul_add(y, z))
}

/// Solves L L^T x = b in place with the factor from `cholesky_lower`.
pub fn cholesky_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let row = &l[i * n..i * n + i];
        let s = crate::matkit::dot(row, &b[..i]);
        b[i] = (b[i] - s) / l[i * n + i];
    }
    for i in (0..n).rev() {
        let bi = b[i] / l[i * n + i];
        b[i] = bi;
        for j in 0..i {
            b[j] -= l[i * n + j] * bi;
        }
    }
}
