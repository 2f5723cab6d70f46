//! Acceptance checks, one line per criterion.
//!
//! The report goes to stdout even without `--nocapture`. The market data comes
//! from `REGATTACK_ISTANBUL` or `fixtures/istanbul.csv` when present, otherwise
//! from the seeded stand-in.
//! Criteria listed in `KNOWN_RED` are reported but do not fail the test.
//! `REGATTACK_CRITERIA=3,6` runs a subset.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use regattack::bench::{
    load_csv, random_baseline, synthetic_market, CsvOptions, PointObjective,
};
use regattack::lasserre::{
    basis_size, localizing_matrix_pattern, moment_matrix_pattern, monomial_basis, Exponent, Polynomial,
};
use regattack::matkit::{self, norm, Matrix};
use regattack::onepoint::{
    attack_coefficient, build_whitened, extreme_eigs, optimal_z, solve_abs_objective, AbsSense, Sense,
};
use regattack::pgd::{pgd_rankone, validate_grad_h, validate_grad_quartic, PgdConfig};
use regattack::polyatk::{build_quartic, solve_quartic, QuarticProgram};
use regattack::rankone::{
    alternating_attack, check_unbounded, criticality_bound, criticality_residual, divergence_probe, random_start,
    solve_ratio_subproblem, uniform_ball, AltOptions, Direction, RankOneContext, RatioCoeffs,
};
use regattack::regress::{fit_ols, refit_add_point, refit_direct, Dataset, RegressionFit};
use regattack::sdpcore::SdpOptions;
use regattack::Error;

/// Criteria that cannot pass in this workspace, with the reason.
const KNOWN_RED: &[(u32, &str)] = &[(9, "the Istanbul CSV is not in the workspace")];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn market() -> (Dataset, String) {
    let path = std::env::var_os("REGATTACK_ISTANBUL")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/istanbul.csv"));
    if path.exists() {
        let opts = CsvOptions {
            response: Some("ISE_USD".into()),
            features: Some(regattack::bench::data::MARKET_FEATURES.iter().map(|s| s.to_string()).collect()),
            ..Default::default()
        };
        match load_csv(&path, &opts) {
            Ok(d) => return (d, path.display().to_string()),
            Err(e) => eprintln!("could not load {}: {e}; using the stand-in", path.display()),
        }
    }
    (synthetic_market(1), "synthetic stand-in (seed 1)".into())
}

fn synthetic(n: usize, m: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let x = Matrix::from_fn(n, m, |_, _| rng.sample(StandardNormal));
    let beta: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y = x
        .matvec(&beta)
        .into_iter()
        .map(|v| v + 0.3 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Dataset::new(x, y).unwrap()
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Halton point k mapped into the dim-ball of radius eta. Directions come
/// from Box-Muller on coordinate pairs; every other point sits on the sphere.
fn halton_ball(k: u64, dim: usize, eta: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(dim);
    let mut p = 0;
    while v.len() < dim {
        let u1 = radical_inverse(k, PRIMES[p]).max(1e-300);
        let u2 = radical_inverse(k, PRIMES[p + 1]);
        let r = (-2.0 * u1.ln()).sqrt();
        let t = 2.0 * std::f64::consts::PI * u2;
        v.push(r * t.cos());
        if v.len() < dim {
            v.push(r * t.sin());
        }
        p += 2;
    }
    let radius = if k.is_multiple_of(2) {
        eta
    } else {
        eta * radical_inverse(k, PRIMES[p]).powf(1.0 / dim as f64)
    };
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x *= radius / nv);
    v
}

/// Smallest and largest β̂_i over `count` quasi-random points of the ball.
fn search_extremes(fit: &RegressionFit, index: usize, eta: f64, count: u64) -> (f64, f64) {
    let m = fit.m();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 1..=count {
        let u = halton_ball(k, m + 1, eta);
        let b = refit_add_point(fit, &u[..m], u[m]).unwrap()[index];
        lo = lo.min(b);
        hi = hi.max(b);
    }
    (lo, hi)
}

/// Closed-form bounds, KKT residuals and the quasi-random search for one
/// (fit, index, eta). Returns (largest bound violation, largest gap, largest
/// KKT residual ratio, elapsed).
fn one_point_instance(fit: &RegressionFit, index: usize, eta: f64) -> (f64, f64, f64, Duration) {
    let t0 = Instant::now();
    let wp = build_whitened(fit, index, eta).unwrap();
    let pair = extreme_eigs(&wp).unwrap();
    let lo = attack_coefficient(fit, index, eta, Sense::Minimize).unwrap();
    let hi = attack_coefficient(fit, index, eta, Sense::Maximize).unwrap();
    let mut kkt: f64 = 0.0;
    for (xi, nu) in [(pair.xi_neg, &pair.nu_neg), (pair.xi_pos, &pair.nu_pos)] {
        let z = optimal_z(&wp, nu);
        let mut k = wp.h_mat.clone();
        k.add_scaled(-xi, &wp.d_mat);
        kkt = kkt.max(matkit::norm_inf(&k.matvec(&z)) / wp.h_mat.max_abs());
    }
    let (smin, smax) = search_extremes(fit, index, eta, 1_000_000);
    // positive violation means the search beat the closed form
    let violation = (lo.predicted_value - smin).max(smax - hi.predicted_value);
    let gap = (smin - lo.predicted_value).max(hi.predicted_value - smax);
    (violation, gap, kkt, t0.elapsed())
}

fn criterion_1(market: &Dataset) -> Outcome {
    let mut worst_violation = f64::NEG_INFINITY;
    let mut worst_gap: f64 = 0.0;
    let mut worst_kkt: f64 = 0.0;
    let mut slowest = Duration::ZERO;
    let mut rng = ChaCha20Rng::seed_from_u64(101);
    for inst in 0..50u64 {
        let m = 2 + (inst % 2) as usize;
        let fit = fit_ols(&synthetic(40, m, 1000 + inst)).unwrap();
        let index = rng.random_range(0..m);
        let eta = rng.random_range(0.05..2.0);
        let (v, g, k, t) = one_point_instance(&fit, index, eta);
        worst_violation = worst_violation.max(v);
        worst_gap = worst_gap.max(g);
        worst_kkt = worst_kkt.max(k);
        slowest = slowest.max(t);
    }
    let fit = fit_ols(market).unwrap();
    let mut market_gap: f64 = 0.0;
    for index in 0..fit.m() {
        let (v, g, k, t) = one_point_instance(&fit, index, 0.2);
        worst_violation = worst_violation.max(v);
        market_gap = market_gap.max(g);
        worst_kkt = worst_kkt.max(k);
        slowest = slowest.max(t);
    }
    let pass = worst_violation <= 1e-3 && worst_kkt <= 1e-7 && slowest <= Duration::from_secs(5);
    outcome(
        pass,
        format!(
            "search beats closed form by at most {worst_violation:.2e}; synthetic search gap {worst_gap:.2e}, \
             market search gap {market_gap:.2e}; KKT {worst_kkt:.1e}; slowest instance {:.2}s",
            slowest.as_secs_f64()
        ),
    )
}

fn criterion_2() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(202);
    let mut worst: f64 = 0.0;
    for case in 0..1000u64 {
        let m = rng.random_range(1..7);
        let n = rng.random_range(m + 2..60);
        let data = synthetic(n, m, 5000 + case);
        let fit = fit_ols(&data).unwrap();
        let scale = 10f64.powf(rng.random_range(-2.0..1.0));
        let x0: Vec<f64> = (0..m).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
        let y0 = scale * rng.sample::<f64, _>(StandardNormal);
        let fast = refit_add_point(&fit, &x0, y0).unwrap();
        let slow = refit_direct(&data, &x0, y0).unwrap();
        worst = worst.max(matkit::norm_inf(&matkit::sub(&fast, &slow)));
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(worst <= 1e-8 && secs <= 10.0, format!("max difference {worst:.1e} over 1000 cases in {secs:.2}s"))
}

fn ball_point(rng: &mut ChaCha20Rng, dim: usize, radius: f64) -> Vec<f64> {
    uniform_ball(rng, dim, radius)
}

/// Largest relative mismatch between the bilevel objective after a direct
/// refit and the quartic at the transformed point, plus the recovery error.
fn chain_error(data: &Dataset, qp: &QuarticProgram, rng: &mut ChaCha20Rng) -> f64 {
    let m = data.m();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let z = ball_point(rng, m + 1, qp.eta);
        let beta = refit_direct(data, &z[..m], z[m]).unwrap();
        let bilevel = qp.coefficient_objective(&beta);
        let x = qp.point_to_x(&z[..m], z[m]);
        let q = qp.objective(&x);
        worst = worst.max((q - bilevel).abs() / (1.0 + bilevel.abs()));
        let back = regattack::polyatk::recover_attack(&x, qp).unwrap();
        let mut zz = back.x0.clone();
        zz.push(back.y0);
        worst = worst.max(matkit::norm_inf(&matkit::sub(&zz, &z)));
        if norm(&x) > qp.eta * (1.0 + 1e-12) {
            worst = f64::INFINITY;
        }
    }
    worst
}

fn grid_min(qp: &QuarticProgram, steps: usize) -> f64 {
    let eta = qp.eta;
    let h = 2.0 * eta / (steps - 1) as f64;
    let mut best = f64::INFINITY;
    for i in 0..steps {
        let a = -eta + h * i as f64;
        for j in 0..steps {
            let b = -eta + h * j as f64;
            for k in 0..steps {
                let c = -eta + h * k as f64;
                if a * a + b * b + c * c <= eta * eta {
                    best = best.min(qp.objective(&[a, b, c]));
                }
            }
        }
    }
    best
}

/// Paper-style instances on the market data, as (0-based index, λ, η).
const MULTI_INSTANCES: [(usize, f64, f64); 6] =
    [(3, -1.0, 0.1), (3, -1.0, 0.2), (3, -1.0, 1.0), (5, 1.0, 0.1), (5, 1.0, 0.5), (5, 1.0, 1.0)];

fn criterion_3(market: &Dataset) -> Outcome {
    let opts = SdpOptions::default();
    let mut rng = ChaCha20Rng::seed_from_u64(303);
    let fit = fit_ols(market).unwrap();
    let mut chain: f64 = 0.0;
    let mut uncertified = Vec::new();
    let mut slowest_n3 = Duration::ZERO;
    for &(i, lambda, eta) in &MULTI_INSTANCES {
        let qp = build_quartic(&fit, i, eta, lambda).unwrap();
        chain = chain.max(chain_error(market, &qp, &mut rng));
        // both orders run so that the order-3 time is measured on every instance
        let low = solve_quartic(&qp, 2, &opts).unwrap();
        let t0 = Instant::now();
        let high = solve_quartic(&qp, 3, &opts).unwrap();
        slowest_n3 = slowest_n3.max(t0.elapsed());
        if !low.certificate.rank_ok && !high.certificate.rank_ok {
            uncertified.push(format!(
                "i={} lambda={lambda} eta={eta} (ranks {}/{}, gap {:.1e})",
                i + 1,
                high.certificate.rank_full,
                high.certificate.rank_reduced,
                high.gap()
            ));
        }
    }
    let mut grid_err: f64 = 0.0;
    for seed in 0..3u64 {
        let data = synthetic(40, 2, 3000 + seed);
        let fit2 = fit_ols(&data).unwrap();
        for (i, lambda) in [(0, -1.0), (1, 2.0)] {
            let qp = build_quartic(&fit2, i, 1.0, lambda).unwrap();
            chain = chain.max(chain_error(&data, &qp, &mut rng));
            let atk = solve_quartic(&qp, 2, &opts).unwrap();
            let grid = grid_min(&qp, 200);
            grid_err = grid_err.max((atk.value - grid).abs());
        }
    }
    let pass = chain <= 1e-8 && uncertified.is_empty() && grid_err <= 1e-3 && slowest_n3 <= Duration::from_secs(120);
    let mut detail = format!(
        "chain error {chain:.1e}; m=2 grid error {grid_err:.1e}; slowest N=3 solve {:.1}s; ",
        slowest_n3.as_secs_f64()
    );
    if uncertified.is_empty() {
        detail.push_str(&format!("all {} market instances rank-certified", MULTI_INSTANCES.len()));
    } else {
        detail.push_str(&format!("no rank certificate at N<=3 for {}", uncertified.join(", ")));
    }
    outcome(pass, detail)
}

fn y_name(alpha: &[u32]) -> String {
    if alpha.iter().all(|&e| e == 0) {
        "1".to_string()
    } else {
        format!("y{}", alpha.iter().map(u32::to_string).collect::<String>())
    }
}

fn render(entry: &[(f64, Exponent)], a_val: f64) -> String {
    let terms: Vec<String> = entry
        .iter()
        .map(|(c, alpha)| {
            let name = y_name(alpha);
            if *c == a_val {
                if name == "1" {
                    "a".to_string()
                } else {
                    format!("a{name}")
                }
            } else if *c == -1.0 {
                format!("- {name}")
            } else {
                format!("{c}{name}")
            }
        })
        .collect();
    terms.join(" ")
}

fn binomial(n: u64, k: u64) -> u64 {
    (1..=k).fold(1, |acc, j| acc * (n + 1 - j) / j)
}

fn criterion_4() -> Outcome {
    let moment_display = [
        ["1", "y10", "y01", "y20", "y11", "y02"],
        ["y10", "y20", "y11", "y30", "y21", "y12"],
        ["y01", "y11", "y02", "y21", "y12", "y03"],
        ["y20", "y30", "y21", "y40", "y31", "y22"],
        ["y11", "y21", "y12", "y31", "y22", "y13"],
        ["y02", "y12", "y03", "y22", "y13", "y04"],
    ];
    let pat = moment_matrix_pattern(2, 2);
    let mut moment_ok = pat.len() == 6;
    for i in 0..6 {
        for j in 0..6 {
            moment_ok &= y_name(&pat[i][j]) == moment_display[i][j];
        }
    }
    // the printed (3,3) entry of the localizing display reads "ay01 - y22 - y04",
    // which cannot come from the basis product x2·x2; the corrected entry is used
    let a_val = 7.0;
    let g = Polynomial::from_terms(2, [(vec![0, 0], a_val), (vec![2, 0], -1.0), (vec![0, 2], -1.0)]).unwrap();
    let local_display = [
        ["a - y20 - y02", "ay10 - y30 - y12", "ay01 - y21 - y03"],
        ["ay10 - y30 - y12", "ay20 - y40 - y22", "ay11 - y31 - y13"],
        ["ay01 - y21 - y03", "ay11 - y31 - y13", "ay02 - y22 - y04"],
    ];
    let lpat = localizing_matrix_pattern(&g, 1);
    let mut local_ok = lpat.len() == 3;
    for i in 0..3 {
        for j in 0..3 {
            local_ok &= render(&lpat[i][j], a_val) == local_display[i][j];
        }
    }
    let mut sizes_ok = true;
    let mut pairs = 0;
    for n in 1..=5usize {
        for deg in 1..=4u32 {
            let expect = binomial((n as u64) + deg as u64, deg as u64) as usize;
            sizes_ok &= basis_size(n, deg) == expect && monomial_basis(n, deg).len() == expect;
            pairs += 1;
        }
    }
    outcome(
        moment_ok && local_ok && sizes_ok,
        format!(
            "6x6 moment display {}, 3x3 localizing display {} (one printed entry corrected), {pairs} basis sizes {}",
            if moment_ok { "matches" } else { "differs" },
            if local_ok { "matches" } else { "differs" },
            if sizes_ok { "match" } else { "differ" }
        ),
    )
}

fn random_ratio(rng: &mut ChaCha20Rng, k: usize) -> RatioCoeffs {
    let mut sym = |shift: f64| {
        let b = Matrix::from_fn(k, k, |_, _| rng.random_range(-1.0..1.0));
        let mut s = b.matmul(&b.transpose()).scale(0.5);
        for j in 0..k {
            s[(j, j)] += shift;
        }
        s
    };
    let a1 = sym(-1.0);
    let a2 = sym(0.1);
    let b1: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
    // denominator ≥ l2 − 2‖b2‖ > 0 on the unit ball since A2 is positive definite
    let b2: Vec<f64> = (0..k).map(|_| rng.random_range(-0.3..0.3)).collect();
    let l1 = rng.random_range(-1.0..1.0);
    let l2 = 1.0 + 2.0 * norm(&b2);
    RatioCoeffs { a1, b1, l1, a2, b2, l2 }
}

/// Dense grid over the unit disc plus a dense sample of its boundary circle.
fn ratio_grid_min(rc: &RatioCoeffs) -> f64 {
    let mut best = f64::INFINITY;
    match rc.dim() {
        1 => {
            let steps = 200_000;
            for s in 0..=steps {
                let x = -1.0 + 2.0 * s as f64 / steps as f64;
                best = best.min(rc.ratio(&[x]));
            }
        }
        _ => {
            let steps = 1000;
            for i in 0..=steps {
                let a = -1.0 + 2.0 * i as f64 / steps as f64;
                for j in 0..=steps {
                    let b = -1.0 + 2.0 * j as f64 / steps as f64;
                    if a * a + b * b <= 1.0 {
                        best = best.min(rc.ratio(&[a, b]));
                    }
                }
            }
            let ring = 200_000;
            for s in 0..ring {
                let t = 2.0 * std::f64::consts::PI * s as f64 / ring as f64;
                best = best.min(rc.ratio(&[t.cos(), t.sin()]));
            }
        }
    }
    best
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(505);
    let mut bound_err: f64 = 0.0;
    let mut recovery_err: f64 = 0.0;
    let mut below_grid: f64 = 0.0;
    for inst in 0..100 {
        let k = if inst % 4 == 0 { 1 } else { 2 };
        let rc = random_ratio(&mut rng, k);
        let sol = solve_ratio_subproblem(&rc, 1.0).unwrap();
        let grid = ratio_grid_min(&rc);
        bound_err = bound_err.max((sol.dual_bound - grid).abs());
        recovery_err = recovery_err.max((sol.value - sol.dual_bound).abs());
        below_grid = below_grid.max(sol.value - grid);
        assert!(norm(&sol.x) <= 1.0 + 1e-10);
    }
    outcome(
        bound_err <= 1e-4 && recovery_err <= 1e-6,
        format!(
            "|bisection - grid| <= {bound_err:.1e}, |recovered - bisection| <= {recovery_err:.1e}, \
             recovered value exceeds grid by at most {below_grid:.1e}"
        ),
    )
}

const RATIOS: [f64; 3] = [0.5, 0.9, 0.95];
/// e₄, the fourth coefficient
const RANKONE_INDEX: usize = 3;

fn criterion_6(market: &Dataset) -> Outcome {
    let fit = fit_ols(market).unwrap();
    let m = fit.m();
    let opts = AltOptions::default();
    let mut worst_increase = f64::NEG_INFINITY;
    let mut worst_critical = f64::INFINITY;
    let mut ao_wins = 0;
    let mut losses = Vec::new();
    let mut speedups = Vec::new();
    let mut runs = 0;
    for seed in 0..100u64 {
        let ratio = RATIOS[(seed % 3) as usize];
        let ctx = RankOneContext::new(&fit, Direction::Decrease.selector(m, RANKONE_INDEX), ratio * fit.sigma_min())
            .unwrap();
        let ao = alternating_attack(&ctx, seed, &opts).unwrap();
        runs += 1;
        let inc = ao.trace.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        worst_increase = worst_increase.max(inc);
        let crit = criticality_residual(&ctx, &ao.c, &ao.d, 10_000, seed).min(criticality_bound(&ctx, &ao.c, &ao.d));
        worst_critical = worst_critical.min(crit);
        let (c0, d0) = random_start(&ctx, seed);
        let cfg = PgdConfig {
            seed,
            ..PgdConfig::with_step(100.0)
        };
        let pgd = pgd_rankone(&ctx, &c0, &d0, &cfg).unwrap();
        if ao.objective <= pgd.value + 1e-9 * (1.0 + pgd.value.abs()) {
            ao_wins += 1;
        } else {
            losses.push(format!("seed {seed} at {ratio}: {:.4} vs {:.4}", ao.objective, pgd.value));
        }
        if ratio == 0.9 {
            speedups.push(pgd.iterations as f64 / ao.iterations.max(1) as f64);
        }
    }
    let min_speedup = speedups.iter().copied().fold(f64::INFINITY, f64::min);
    let monotone = worst_increase <= 1e-10;
    let critical = worst_critical >= -1e-5;
    let dominance = ao_wins >= 95;
    let faster = min_speedup >= 10.0;
    let mut detail = format!(
        "{runs} runs: max trace increase {worst_increase:.1e}, min criticality {worst_critical:.1e}, \
         AO <= PGD(a=100) on {ao_wins}/100, min PGD/AO iteration ratio at 0.9 = {min_speedup:.1}"
    );
    if !losses.is_empty() {
        detail.push_str(&format!("; AO behind on {}", losses.join(", ")));
    }
    outcome(monotone && critical && dominance && faster, detail)
}

fn criterion_7(market: &Dataset) -> Outcome {
    let fit = fit_ols(market).unwrap();
    let m = fit.m();
    let s = fit.sigma_min();
    let e = Direction::Decrease.selector(m, RANKONE_INDEX);
    let above = RankOneContext::new(&fit, e.clone(), 1.01 * s).unwrap();
    let cert = check_unbounded(&fit, 1.01 * s).is_some();
    let refused = matches!(alternating_attack(&above, 0, &AltOptions::default()), Err(Error::Unbounded { .. }));
    let probe = divergence_probe(&above, &fit).unwrap();
    let diverges = probe.value < -1e3 * probe.baseline.abs();

    let below = RankOneContext::new(&fit, e, 0.99 * s).unwrap();
    let no_cert = check_unbounded(&fit, 0.99 * s).is_none();
    let mut bounded = true;
    for seed in 0..5 {
        match alternating_attack(&below, seed, &AltOptions::default()) {
            Ok(r) => bounded &= r.objective.is_finite() && r.trace.iter().all(|v| v.is_finite()),
            Err(_) => bounded = false,
        }
    }
    outcome(
        cert && refused && diverges && no_cert && bounded,
        format!(
            "at 1.01 sigma_m: certificate {cert}, AO refused {refused}, probe {:.3e} vs baseline {:.3e}; \
             at 0.99 sigma_m: no certificate {no_cert}, 5 AO runs bounded {bounded}",
            probe.value, probe.baseline
        ),
    )
}

fn criterion_8(market: &Dataset) -> Outcome {
    let fit = fit_ols(market).unwrap();
    let (n, m) = (fit.n(), fit.m());
    let mut rng = ChaCha20Rng::seed_from_u64(808);
    let ctx = RankOneContext::new(&fit, Direction::Decrease.selector(m, 2), 0.7 * fit.sigma_min()).unwrap();
    let pts: Vec<(Vec<f64>, Vec<f64>)> =
        (0..100).map(|_| (uniform_ball(&mut rng, n, 1.0), uniform_ball(&mut rng, m, ctx.eta))).collect();
    let err_h = validate_grad_h(&ctx, &pts);
    let qp = build_quartic(&fit, 3, 1.0, -1.0).unwrap();
    let xs: Vec<Vec<f64>> = (0..100).map(|_| uniform_ball(&mut rng, m + 1, 1.0)).collect();
    let err_q = validate_grad_quartic(&qp, &xs);
    outcome(
        err_h <= 1e-5 && err_q <= 1e-5,
        format!("max relative error: rank-one objective {err_h:.1e}, quartic {err_q:.1e}"),
    )
}

fn criterion_9(market: &Dataset, source: &str) -> Outcome {
    let shape_ok = market.n() == 536 && market.m() == 7 && market.y.len() == 536;
    let real = !source.starts_with("synthetic");
    outcome(
        shape_ok && real,
        format!("{} x {} features, {} responses from {source}", market.n(), market.m(), market.y.len()),
    )
}

fn criterion_10(market: &Dataset) -> Outcome {
    let fit = fit_ols(market).unwrap();
    let trials = 10_000;
    let tol = |v: f64| 1e-9 * (1.0 + v.abs());
    let mut pairs = 0;
    let mut beaten = Vec::new();
    for index in 0..fit.m() {
        for eta in [0.05, 0.2, 1.0] {
            for sense in [Sense::Minimize, Sense::Maximize] {
                let obj = PointObjective::Signed { index, sense };
                let exact = attack_coefficient(&fit, index, eta, sense).unwrap();
                let rnd = random_baseline(&fit, &obj, eta, trials, index as u64).unwrap();
                pairs += 1;
                let (e, r) = (obj.score(&exact.predicted_beta), obj.score(&rnd.beta));
                if r < e - tol(e) {
                    beaten.push(format!("{sense:?} i={} eta={eta}", index + 1));
                }
            }
            for sense in [AbsSense::Shrink, AbsSense::Grow] {
                let obj = PointObjective::Abs { index, sense };
                let exact = solve_abs_objective(&fit, index, eta, sense, true).unwrap();
                let rnd = random_baseline(&fit, &obj, eta, trials, 100 + index as u64).unwrap();
                pairs += 1;
                let (e, r) = (obj.score(&exact.point.predicted_beta), obj.score(&rnd.beta));
                if r < e - tol(e) {
                    beaten.push(format!("{sense:?} i={} eta={eta}", index + 1));
                }
            }
        }
    }
    let opts = SdpOptions::default();
    for &(i, lambda, eta) in &MULTI_INSTANCES {
        let qp = build_quartic(&fit, i, eta, lambda).unwrap();
        let atk = solve_quartic(&qp, 2, &opts).unwrap();
        let obj = PointObjective::Multi(Box::new(qp.clone()));
        let rnd = random_baseline(&fit, &obj, eta, trials, 200 + i as u64).unwrap();
        pairs += 1;
        let solved = qp.coefficient_objective(&atk.point.predicted_beta);
        if rnd.value < solved - tol(solved) {
            beaten.push(format!("multi i={} lambda={lambda} eta={eta}", i + 1));
        }
    }
    outcome(
        beaten.is_empty(),
        if beaten.is_empty() {
            format!("best of {trials} random points never beats the solver on {pairs} (objective, i, eta) cases")
        } else {
            format!("random search wins on {}", beaten.join(", "))
        },
    )
}

/// Straight to the process stdout, past the test harness capture, so the
/// report shows up in a plain `cargo test` log.
fn report(line: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

#[test]
fn acceptance() {
    let (market, source) = market();
    report(&format!("market data: {source}"));
    type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let checks: Vec<(u32, Check)> = vec![
        (1, Box::new(|| criterion_1(&market))),
        (2, Box::new(criterion_2)),
        (3, Box::new(|| criterion_3(&market))),
        (4, Box::new(criterion_4)),
        (5, Box::new(criterion_5)),
        (6, Box::new(|| criterion_6(&market))),
        (7, Box::new(|| criterion_7(&market))),
        (8, Box::new(|| criterion_8(&market))),
        (9, Box::new(|| criterion_9(&market, &source))),
        (10, Box::new(|| criterion_10(&market))),
    ];
    let only: Option<Vec<u32>> = std::env::var("REGATTACK_CRITERIA")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let mut unexpected = Vec::new();
    for (id, check) in &checks {
        if only.as_ref().is_some_and(|o| !o.contains(id)) {
            continue;
        }
        let t0 = Instant::now();
        let out = check();
        let known = KNOWN_RED.iter().find(|(k, _)| k == id);
        let tag = if out.pass { "PASS" } else { "FAIL" };
        let note = match (out.pass, known) {
            (false, Some((_, why))) => format!(" [known red: {why}]"),
            _ => String::new(),
        };
        report(&format!("criterion {id}: {tag} {} ({:.1}s){note}", out.detail, t0.elapsed().as_secs_f64()));
        if !out.pass && known.is_none() {
            unexpected.push(*id);
        }
    }
    assert!(unexpected.is_empty(), "criteria failed: {unexpected:?}");
}
