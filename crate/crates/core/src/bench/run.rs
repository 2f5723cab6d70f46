//! Experiment specs, dispatch to the attack modules, and the results table.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::bench::baseline::{random_baseline, PointObjective};
use crate::bench::svg::{bar_chart, line_chart, Series};
use crate::error::{Error, Result};
use crate::matkit::{self, dot, Matrix};
use crate::onepoint::{attack_coefficient, solve_abs_objective, AbsSense, Sense};
use crate::pgd::{pgd_rankone, PgdConfig};
use crate::polyatk::{build_quartic, solve_quartic};
use crate::rankone::{alternating_attack, pinv_update, random_start, AltOptions, Direction, RankOneContext};
use crate::regress::{fit_ols, refit_direct, Dataset, RegressionFit};
use crate::sdpcore::SdpOptions;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttackKind {
    One,
    Multi,
    RankOne,
    Pgd,
    Random,
}

impl AttackKind {
    pub fn name(self) -> &'static str {
        match self {
            AttackKind::One => "one",
            AttackKind::Multi => "multi",
            AttackKind::RankOne => "rankone",
            AttackKind::Pgd => "pgd",
            AttackKind::Random => "random",
        }
    }
}

/// What the single-point attacks (and the random baseline) aim for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Goal {
    Minimize,
    Maximize,
    Shrink,
    Grow,
}

impl Goal {
    pub fn name(self) -> &'static str {
        match self {
            Goal::Minimize => "min",
            Goal::Maximize => "max",
            Goal::Shrink => "shrink",
            Goal::Grow => "grow",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reduction {
    Best,
    Mean,
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    /// label echoed into every row
    pub dataset: String,
    pub attack: AttackKind,
    pub goal: Goal,
    /// 0-based coefficient index
    pub index: usize,
    /// absolute budgets, or fractions of σ_m for rankone and pgd
    pub etas: Vec<f64>,
    pub lambda: f64,
    pub order: u32,
    pub trials: u64,
    pub seeds: Vec<u64>,
    pub reduction: Reduction,
    /// step constant a of the a/(1+t) schedule
    pub pgd_step: f64,
    pub max_iter: usize,
    /// let rankone budgets reach σ_m instead of refusing
    pub allow_unbounded: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            dataset: "synthetic".into(),
            attack: AttackKind::One,
            goal: Goal::Minimize,
            index: 0,
            etas: vec![0.2],
            lambda: 1.0,
            order: 2,
            trials: 10_000,
            seeds: vec![0],
            reduction: Reduction::Mean,
            pgd_step: 100.0,
            max_iter: 10_000,
            allow_unbounded: false,
        }
    }
}

impl ExperimentSpec {
    fn budget_is_fraction(&self) -> bool {
        matches!(self.attack, AttackKind::RankOne | AttackKind::Pgd)
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if self.index >= m {
            return Err(Error::InvalidArgument(format!("coefficient index {} out of range for {m} features", self.index + 1)));
        }
        if self.etas.is_empty() || self.seeds.is_empty() {
            return Err(Error::InvalidArgument("need at least one budget and one seed".into()));
        }
        if self.etas.iter().any(|e| !(*e >= 0.0) || !e.is_finite()) {
            return Err(Error::InvalidArgument("budgets must be finite and nonnegative".into()));
        }
        if self.budget_is_fraction() && !self.allow_unbounded && self.etas.iter().any(|&e| e >= 1.0) {
            return Err(Error::InvalidArgument(
                "rank-one budgets are fractions of the smallest singular value and must stay below 1".into(),
            ));
        }
        if self.attack == AttackKind::Random && self.trials == 0 {
            return Err(Error::InvalidArgument("need at least one trial".into()));
        }
        Ok(())
    }
}

/// What it takes to rebuild the poisoned data.
#[derive(Clone, Debug, PartialEq)]
pub enum Artifact {
    Point { x0: Vec<f64>, y0: f64 },
    RankOne { c: Vec<f64>, d: Vec<f64> },
}

#[derive(Clone, Debug)]
pub struct ResultRow {
    pub dataset: String,
    pub attack: AttackKind,
    pub goal: Goal,
    pub index: usize,
    pub eta: f64,
    /// η/σ_m for the rank-one family
    pub eta_fraction: Option<f64>,
    pub lambda: f64,
    pub order: u32,
    pub seed: u64,
    pub trials: u64,
    pub objective: f64,
    pub beta_before: Vec<f64>,
    pub beta_after: Vec<f64>,
    pub iterations: usize,
    pub wall_ms: f64,
    /// rank test passed or the relaxation bound is met (multi only)
    pub certified: Option<bool>,
    pub artifact: Artifact,
    pub trace: Vec<f64>,
}

impl ResultRow {
    /// Independent refit on the poisoned data rebuilt from the artifact.
    pub fn replay_beta(&self, data: &Dataset) -> Result<Vec<f64>> {
        match &self.artifact {
            Artifact::Point { x0, y0 } => refit_direct(data, x0, *y0),
            Artifact::RankOne { c, d } => {
                let mut x = data.x.clone();
                x.add_scaled(1.0, &Matrix::outer(c, d));
                Ok(fit_ols(&Dataset::new(x, data.y.clone())?)?.beta0)
            }
        }
    }
}

pub fn run(spec: &ExperimentSpec, data: &Dataset) -> Result<Vec<ResultRow>> {
    let fit = fit_ols(data)?;
    spec.validate(fit.m())?;
    let jobs: Vec<(f64, u64)> = spec
        .etas
        .iter()
        .flat_map(|&e| spec.seeds.iter().map(move |&s| (e, s)))
        .collect();
    let mut rows = jobs
        .par_iter()
        .map(|&(eta, seed)| run_one(spec, data, &fit, eta, seed))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.eta.total_cmp(&b.eta).then(a.seed.cmp(&b.seed)));
    Ok(rows)
}

fn run_one(spec: &ExperimentSpec, data: &Dataset, fit: &RegressionFit, eta: f64, seed: u64) -> Result<ResultRow> {
    let start = Instant::now();
    let m = fit.m();
    let mut row = ResultRow {
        dataset: spec.dataset.clone(),
        attack: spec.attack,
        goal: spec.goal,
        index: spec.index,
        eta,
        eta_fraction: None,
        lambda: spec.lambda,
        order: spec.order,
        seed,
        trials: 1,
        objective: f64::NAN,
        beta_before: fit.beta0.clone(),
        beta_after: fit.beta0.clone(),
        iterations: 0,
        wall_ms: 0.0,
        certified: None,
        artifact: Artifact::Point {
            x0: vec![0.0; m],
            y0: 0.0,
        },
        trace: Vec::new(),
    };
    let i = spec.index;
    match spec.attack {
        AttackKind::One => {
            let point = match spec.goal {
                Goal::Minimize => attack_coefficient(fit, i, eta, Sense::Minimize)?,
                Goal::Maximize => attack_coefficient(fit, i, eta, Sense::Maximize)?,
                Goal::Shrink => solve_abs_objective(fit, i, eta, AbsSense::Shrink, true)?.point,
                Goal::Grow => solve_abs_objective(fit, i, eta, AbsSense::Grow, false)?.point,
            };
            row.objective = point_objective(spec, fit, eta)?.value(&point.predicted_beta);
            row.beta_after = point.predicted_beta.clone();
            row.artifact = Artifact::Point { x0: point.x0, y0: point.y0 };
        }
        AttackKind::Multi => {
            let qp = build_quartic(fit, i, eta, spec.lambda)?;
            let res = solve_quartic(&qp, spec.order, &SdpOptions::default())?;
            row.objective = res.value;
            row.beta_after = res.point.predicted_beta.clone();
            row.iterations = res.sdp_iterations;
            row.certified = Some(res.globally_optimal());
            row.artifact = Artifact::Point {
                x0: res.point.x0,
                y0: res.point.y0,
            };
        }
        AttackKind::Random => {
            let obj = point_objective(spec, fit, eta)?;
            let r = random_baseline(fit, &obj, eta, spec.trials, seed)?;
            row.trials = spec.trials;
            row.objective = r.value;
            row.beta_after = r.beta;
            row.artifact = Artifact::Point { x0: r.x0, y0: r.y0 };
        }
        AttackKind::RankOne | AttackKind::Pgd => {
            let abs_eta = eta * fit.sigma_min();
            row.eta_fraction = Some(eta);
            row.eta = abs_eta;
            let e = match spec.goal {
                Goal::Maximize => Direction::Increase.selector(m, i),
                _ => Direction::Decrease.selector(m, i),
            };
            let ctx = RankOneContext::new(fit, e.clone(), abs_eta)?;
            let (c, d, value, iterations, trace) = if spec.attack == AttackKind::RankOne {
                let opts = AltOptions {
                    max_iter: spec.max_iter,
                    ..Default::default()
                };
                let r = alternating_attack(&ctx, seed, &opts)?;
                (r.c, r.d, r.objective, r.iterations, r.trace)
            } else {
                let (c0, d0) = random_start(&ctx, seed);
                let cfg = PgdConfig {
                    a: spec.pgd_step,
                    max_iter: spec.max_iter,
                    seed,
                    ..Default::default()
                };
                let r = pgd_rankone(&ctx, &c0, &d0, &cfg)?;
                let n = c0.len();
                (r.x[..n].to_vec(), r.x[n..].to_vec(), r.value, r.iterations, r.trace)
            };
            let g = pinv_update(fit, &c, &d)?;
            let mut pinv = fit.pinv.clone();
            pinv.add_scaled(1.0, &g);
            row.beta_after = pinv.matvec(&data.y);
            row.objective = value;
            row.iterations = iterations;
            row.trace = trace;
            row.artifact = Artifact::RankOne { c, d };
            debug_assert!((dot(&e, &matkit::sub(&row.beta_after, &fit.beta0)) - value).abs() < 1e-6);
        }
    }
    row.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(row)
}

pub fn point_objective(spec: &ExperimentSpec, fit: &RegressionFit, eta: f64) -> Result<PointObjective> {
    let index = spec.index;
    Ok(match (spec.attack, spec.goal) {
        (AttackKind::Multi, _) => PointObjective::Multi(Box::new(build_quartic(fit, index, eta, spec.lambda)?)),
        (_, Goal::Minimize) => PointObjective::Signed {
            index,
            sense: Sense::Minimize,
        },
        (_, Goal::Maximize) => PointObjective::Signed {
            index,
            sense: Sense::Maximize,
        },
        (_, Goal::Shrink) => PointObjective::Abs {
            index,
            sense: AbsSense::Shrink,
        },
        (_, Goal::Grow) => PointObjective::Abs {
            index,
            sense: AbsSense::Grow,
        },
    })
}

/// Mean or best objective per budget, in budget order.
pub fn summarize(rows: &[ResultRow], reduction: Reduction) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, Vec<f64>)> = Vec::new();
    for r in rows {
        let key = r.eta_fraction.unwrap_or(r.eta);
        match out.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r.objective),
            None => out.push((key, vec![r.objective])),
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out.into_iter()
        .map(|(k, v)| {
            let value = match reduction {
                Reduction::Mean => v.iter().sum::<f64>() / v.len() as f64,
                Reduction::Best => v.iter().copied().fold(f64::INFINITY, f64::min),
            };
            (k, value)
        })
        .collect()
}

pub const CSV_HEADER: [&str; 17] = [
    "dataset",
    "attack",
    "goal",
    "index",
    "eta",
    "eta_fraction",
    "lambda",
    "order",
    "seed",
    "trials",
    "objective",
    "iterations",
    "wall_ms",
    "certified",
    "beta_before",
    "beta_after",
    "artifact",
];

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn write_results_csv(rows: &[ResultRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        let artifact = match &r.artifact {
            Artifact::Point { x0, y0 } => format!("x0={};y0={y0}", join(x0)),
            Artifact::RankOne { c, d } => format!("c={};d={}", join(c), join(d)),
        };
        w.write_record([
            r.dataset.clone(),
            r.attack.name().into(),
            r.goal.name().into(),
            (r.index + 1).to_string(),
            r.eta.to_string(),
            r.eta_fraction.map(|f| f.to_string()).unwrap_or_default(),
            r.lambda.to_string(),
            r.order.to_string(),
            r.seed.to_string(),
            r.trials.to_string(),
            r.objective.to_string(),
            r.iterations.to_string(),
            format!("{:.3}", r.wall_ms),
            r.certified.map(|c| c.to_string()).unwrap_or_default(),
            join(&r.beta_before),
            join(&r.beta_after),
            artifact,
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// results.csv plus the SVG charts that fit the rows.
pub fn write_artifacts(rows: &[ResultRow], spec: &ExperimentSpec, dir: &Path, names: Option<&[String]>) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let csv_path = dir.join("results.csv");
    write_results_csv(rows, std::fs::File::create(&csv_path)?)?;
    written.push(csv_path);
    let Some(first) = rows.first() else {
        return Ok(written);
    };
    let mut save = |name: &str, svg: String| -> Result<()> {
        let p = dir.join(name);
        std::fs::write(&p, svg)?;
        written.push(p);
        Ok(())
    };

    let budgets = summarize(rows, spec.reduction);
    if budgets.len() > 1 {
        let xlabel = if first.eta_fraction.is_some() { "eta / sigma_min" } else { "eta" };
        let label = match spec.reduction {
            Reduction::Mean => "mean",
            Reduction::Best => "best",
        };
        save(
            "objective_vs_eta.svg",
            line_chart(
                &format!("{} attack on coefficient {}", first.attack.name(), first.index + 1),
                xlabel,
                "objective",
                &[Series::new(format!("{} ({label})", first.attack.name()), budgets)],
            ),
        )?;
    }

    let categories: Vec<String> = match names {
        Some(n) => n.to_vec(),
        None => (1..=first.beta_before.len()).map(|k| format!("b{k}")).collect(),
    };
    let last = rows.last().expect("nonempty");
    save(
        "beta_before_after.svg",
        bar_chart(
            &format!("coefficients before and after ({}, eta = {:.4})", last.attack.name(), last.eta),
            "coefficient",
            &categories,
            &[("before".into(), last.beta_before.clone()), ("after".into(), last.beta_after.clone())],
        ),
    )?;

    let traces: Vec<Series> = rows
        .iter()
        .filter(|r| r.trace.len() > 1)
        .take(6)
        .map(|r| Series::trace(format!("eta={:.3} seed={}", r.eta_fraction.unwrap_or(r.eta), r.seed), &r.trace))
        .collect();
    if !traces.is_empty() {
        save(
            "convergence.svg",
            line_chart(&format!("{} convergence", first.attack.name()), "iteration", "objective", &traces),
        )?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::synthetic_market;

    #[test]
    fn rows_replay_and_reproduce() {
        let data = synthetic_market(11);
        let specs = [
            ExperimentSpec {
                attack: AttackKind::One,
                goal: Goal::Shrink,
                index: 3,
                etas: vec![0.1, 0.2],
                ..Default::default()
            },
            ExperimentSpec {
                attack: AttackKind::Random,
                index: 3,
                trials: 200,
                seeds: vec![1, 2],
                ..Default::default()
            },
            ExperimentSpec {
                attack: AttackKind::RankOne,
                index: 3,
                etas: vec![0.3, 0.6],
                seeds: vec![4],
                ..Default::default()
            },
            ExperimentSpec {
                attack: AttackKind::Pgd,
                index: 3,
                etas: vec![0.3],
                pgd_step: 1.0,
                max_iter: 300,
                ..Default::default()
            },
        ];
        for spec in &specs {
            let rows = run(spec, &data).unwrap();
            let again = run(spec, &data).unwrap();
            for (a, b) in rows.iter().zip(&again) {
                assert_eq!(a.objective.to_bits(), b.objective.to_bits());
                let replay = a.replay_beta(&data).unwrap();
                let diff = replay.iter().zip(&a.beta_after).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                assert!(diff < 1e-6, "{:?} {diff:e}", spec.attack);
            }
            let dir = tempfile::tempdir().unwrap();
            let files = write_artifacts(&rows, spec, dir.path(), None).unwrap();
            let text = std::fs::read_to_string(&files[0]).unwrap();
            assert_eq!(text.lines().count(), rows.len() + 1);
        }
    }

    #[test]
    fn rankone_refuses_full_budget() {
        let data = synthetic_market(12);
        let spec = ExperimentSpec {
            attack: AttackKind::RankOne,
            etas: vec![1.0],
            ..Default::default()
        };
        assert!(matches!(run(&spec, &data), Err(Error::InvalidArgument(_))));
        let spec = ExperimentSpec {
            allow_unbounded: true,
            ..spec
        };
        assert!(matches!(run(&spec, &data), Err(Error::Unbounded { .. })));
    }

    #[test]
    fn summaries() {
        let data = synthetic_market(13);
        let spec = ExperimentSpec {
            attack: AttackKind::Random,
            etas: vec![0.1, 0.2],
            seeds: vec![1, 2, 3],
            trials: 10,
            ..Default::default()
        };
        let rows = run(&spec, &data).unwrap();
        let mean = summarize(&rows, Reduction::Mean);
        let best = summarize(&rows, Reduction::Best);
        assert_eq!(mean.len(), 2);
        for (m, b) in mean.iter().zip(&best) {
            assert!(b.1 <= m.1);
        }
    }
}
