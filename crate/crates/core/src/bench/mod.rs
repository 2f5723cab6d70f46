//! Experiment harness: data loading, the random baseline, result tables and plots.

pub mod baseline;
pub mod data;
pub mod run;
pub mod svg;

pub use baseline::{random_baseline, random_point, BaselineResult, PointObjective};
pub use data::{load_csv, read_csv, synthetic_market, CsvOptions};
pub use run::{
    run, summarize, write_artifacts, write_results_csv, Artifact, AttackKind, ExperimentSpec, Goal, Reduction, ResultRow,
};
