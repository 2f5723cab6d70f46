//! Best-of-k random poisoning points, the yardstick the exact attacks are
//! compared against.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matkit::norm;
use crate::onepoint::{AbsSense, Sense};
use crate::polyatk::QuarticProgram;
use crate::regress::{refit_add_point, RegressionFit};

/// What a single poisoning point is trying to do to the refit coefficients.
#[derive(Clone, Debug)]
pub enum PointObjective {
    Signed { index: usize, sense: Sense },
    Abs { index: usize, sense: AbsSense },
    /// weighted distance to the target vector of a multi-coefficient attack
    Multi(Box<QuarticProgram>),
}

impl PointObjective {
    /// Objective in its natural units (β̂_i, |β̂_i| or the weighted distance).
    pub fn value(&self, beta: &[f64]) -> f64 {
        match self {
            PointObjective::Signed { index, .. } => beta[*index],
            PointObjective::Abs { index, .. } => beta[*index].abs(),
            PointObjective::Multi(qp) => qp.coefficient_objective(beta),
        }
    }

    /// Same objective turned so that smaller is better.
    pub fn score(&self, beta: &[f64]) -> f64 {
        let v = self.value(beta);
        match self {
            PointObjective::Signed { sense: Sense::Maximize, .. }
            | PointObjective::Abs { sense: AbsSense::Grow, .. } => -v,
            _ => v,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BaselineResult {
    pub x0: Vec<f64>,
    pub y0: f64,
    pub beta: Vec<f64>,
    pub value: f64,
    /// index of the winning draw
    pub trial: u64,
    pub trials: u64,
}

/// Draw `trial` of the stream: i.i.d. normal entries, rescaled so that
/// ‖[x0; y0]‖ = η.
pub fn random_point(m: usize, eta: f64, seed: u64, trial: u64) -> (Vec<f64>, f64) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let mut u: Vec<f64> = (0..=m).map(|_| StandardNormal.sample(&mut rng)).collect();
    let s = eta / norm(&u);
    u.iter_mut().for_each(|v| *v *= s);
    let y0 = u.pop().expect("m + 1 entries");
    (u, y0)
}

/// Best of `trials` random points. Each draw has its own ChaCha20 stream, so
/// the result does not depend on the thread count.
pub fn random_baseline(
    fit: &RegressionFit,
    objective: &PointObjective,
    eta: f64,
    trials: u64,
    seed: u64,
) -> Result<BaselineResult> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(Error::InvalidArgument(format!("budget must be finite and nonnegative, got {eta}")));
    }
    let m = fit.m();
    let (score, trial) = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(f64, u64)> {
            let (x0, y0) = random_point(m, eta, seed, t);
            let beta = refit_add_point(fit, &x0, y0)?;
            Ok((objective.score(&beta), t))
        })
        .try_reduce(
            || (f64::INFINITY, u64::MAX),
            |a, b| Ok(if (b.0, b.1) < (a.0, a.1) && !b.0.is_nan() { b } else { a }),
        )?;
    if !score.is_finite() {
        return Err(Error::Numerical("every random draw produced a non-finite objective".into()));
    }
    let (x0, y0) = random_point(m, eta, seed, trial);
    let beta = refit_add_point(fit, &x0, y0)?;
    Ok(BaselineResult {
        value: objective.value(&beta),
        x0,
        y0,
        beta,
        trial,
        trials,
    })
}
