//! Projected gradient descent with a diminishing step a/(1+t), plus the
//! analytic gradients of both attack objectives and a finite-difference check.

use crate::error::{Error, Result};
use crate::matkit::norm;
use crate::polyatk::QuarticProgram;
use crate::rankone::RankOneContext;

#[derive(Clone, Copy, Debug)]
pub struct PgdConfig {
    /// step at iteration t is a/(1+t)
    pub a: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl PgdConfig {
    pub const PRESETS: [f64; 3] = [1.0, 10.0, 100.0];

    pub fn with_step(a: f64) -> Self {
        PgdConfig { a, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0) || !self.a.is_finite() {
            return Err(Error::InvalidArgument(format!("step constant must be positive, got {}", self.a)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        Ok(())
    }

    pub fn step(&self, t: usize) -> f64 {
        self.a / (1.0 + t as f64)
    }
}

impl Default for PgdConfig {
    fn default() -> Self {
        PgdConfig {
            a: 1.0,
            max_iter: 10_000,
            tol: 1e-9,
            seed: 0,
        }
    }
}

/// Ball constraint ‖x[start..start+len]‖ ≤ radius on one block of variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallBlock {
    pub start: usize,
    pub len: usize,
    pub radius: f64,
}

pub fn project_ball(v: &[f64], r: f64) -> Vec<f64> {
    let nv = norm(v);
    if nv <= r {
        v.to_vec()
    } else {
        v.iter().map(|x| x * r / nv).collect()
    }
}

fn project_blocks(x: &mut [f64], blocks: &[BallBlock]) {
    for b in blocks {
        let part = &mut x[b.start..b.start + b.len];
        let p = project_ball(part, b.radius);
        part.copy_from_slice(&p);
    }
}

#[derive(Clone, Debug)]
pub struct PgdResult {
    pub x: Vec<f64>,
    pub value: f64,
    /// objective at x0 and after every step
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Stops once the objective change is within `tol` (relative) and the
/// iterate has stopped moving.
pub fn pgd_minimize(
    f: impl Fn(&[f64]) -> f64,
    grad: impl Fn(&[f64]) -> Vec<f64>,
    blocks: &[BallBlock],
    x0: &[f64],
    cfg: &PgdConfig,
) -> Result<PgdResult> {
    cfg.validate()?;
    for b in blocks {
        if b.start + b.len > x0.len() || !(b.radius >= 0.0) {
            return Err(Error::InvalidArgument(format!("bad ball block {b:?} for {} variables", x0.len())));
        }
        if norm(&x0[b.start..b.start + b.len]) > b.radius * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument("starting point violates a ball constraint".into()));
        }
    }
    let mut x = x0.to_vec();
    let mut value = f(&x);
    let mut trace = vec![value];
    let mut converged = false;
    let mut iterations = 0;
    for t in 0..cfg.max_iter {
        iterations += 1;
        let g = grad(&x);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite gradient at iteration {t}, iterate {x:?}")));
        }
        let step = cfg.step(t);
        let prev = x.clone();
        x.iter_mut().zip(&g).for_each(|(xi, gi)| *xi -= step * gi);
        project_blocks(&mut x, blocks);
        let next = f(&x);
        trace.push(next);
        let change = (next - value).abs();
        let moved = norm(&x.iter().zip(&prev).map(|(a, b)| a - b).collect::<Vec<_>>());
        value = next;
        // a step that swaps between equal-valued points is not convergence
        if change <= cfg.tol * (1.0 + value.abs()) && moved <= cfg.tol.sqrt() * (1.0 + norm(&prev)) {
            converged = true;
            break;
        }
    }
    Ok(PgdResult {
        x,
        value,
        trace,
        iterations,
        converged,
    })
}

pub fn grad_quartic(qp: &QuarticProgram, x: &[f64]) -> Vec<f64> {
    qp.gradient(x)
}

pub fn grad_h(ctx: &RankOneContext, c: &[f64], d: &[f64]) -> (Vec<f64>, Vec<f64>) {
    ctx.gradient(c, d)
}

/// PGD on h over [c; d] with ‖c‖ ≤ 1 and ‖d‖ ≤ η.
pub fn pgd_rankone(ctx: &RankOneContext, c0: &[f64], d0: &[f64], cfg: &PgdConfig) -> Result<PgdResult> {
    let n = c0.len();
    let blocks = [
        BallBlock {
            start: 0,
            len: n,
            radius: 1.0,
        },
        BallBlock {
            start: n,
            len: d0.len(),
            radius: ctx.eta,
        },
    ];
    let x0: Vec<f64> = c0.iter().chain(d0).copied().collect();
    pgd_minimize(
        |x| ctx.objective(&x[..n], &x[n..]),
        |x| {
            let (gc, gd) = ctx.gradient(&x[..n], &x[n..]);
            gc.into_iter().chain(gd).collect()
        },
        &blocks,
        &x0,
        cfg,
    )
}

/// PGD on the quartic over ‖x‖ ≤ η.
pub fn pgd_quartic(qp: &QuarticProgram, x0: &[f64], cfg: &PgdConfig) -> Result<PgdResult> {
    let blocks = [BallBlock {
        start: 0,
        len: x0.len(),
        radius: qp.eta,
    }];
    pgd_minimize(|x| qp.objective(x), |x| qp.gradient(x), &blocks, x0, cfg)
}

/// Central differences with step 1e−5(1 + ‖x‖).
pub fn finite_difference(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let h = 1e-5 * (1.0 + norm(x));
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|k| {
            probe[k] = x[k] + h;
            let up = f(&probe);
            probe[k] = x[k] - h;
            let down = f(&probe);
            probe[k] = x[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// ‖g − g_fd‖ / max(‖g‖, ‖g_fd‖); zero when both vanish.
pub fn gradient_error(f: impl Fn(&[f64]) -> f64, analytic: &[f64], x: &[f64]) -> f64 {
    let fd = finite_difference(f, x);
    let diff: Vec<f64> = fd.iter().zip(analytic).map(|(a, b)| a - b).collect();
    let scale = norm(&fd).max(norm(analytic));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}

/// Largest relative gradient error of h over the given points.
pub fn validate_grad_h(ctx: &RankOneContext, points: &[(Vec<f64>, Vec<f64>)]) -> f64 {
    points
        .iter()
        .map(|(c, d)| {
            let n = c.len();
            let x: Vec<f64> = c.iter().chain(d).copied().collect();
            let (gc, gd) = ctx.gradient(c, d);
            let g: Vec<f64> = gc.into_iter().chain(gd).collect();
            gradient_error(|z| ctx.objective(&z[..n], &z[n..]), &g, &x)
        })
        .fold(0.0, f64::max)
}

pub fn validate_grad_quartic(qp: &QuarticProgram, points: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .map(|x| gradient_error(|z| qp.objective(z), &qp.gradient(x), x))
        .fold(0.0, f64::max)
}

/// Mean and best of a set of final objective values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reductions {
    pub mean: f64,
    pub best: f64,
}

pub fn reduce(values: &[f64]) -> Reductions {
    Reductions {
        mean: values.iter().sum::<f64>() / values.len() as f64,
        best: values.iter().copied().fold(f64::INFINITY, f64::min),
    }
}

/// Largest single-step increase along a trace; positive means the trace
/// went up somewhere.
pub fn max_increase(trace: &[f64]) -> f64 {
    trace.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
}
