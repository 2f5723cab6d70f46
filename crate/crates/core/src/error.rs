use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("matrix is rank deficient: smallest singular value {sigma_min:e}, largest {sigma_max:e}")]
    Singular { sigma_min: f64, sigma_max: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("target column of the Gram inverse is zero; coefficient {0} cannot be attacked")]
    DegenerateTarget(usize),

    #[error("cannot recover a poison point: 1 - w'A w = {0:e} is not positive")]
    InfeasibleRecovery(f64),

    #[error("budget {eta:e} is not below the smallest singular value {sigma_min:e}; the rank-one attack is unbounded")]
    Unbounded { eta: f64, sigma_min: f64 },

    #[error("relaxation order {order} is too low; at least {needed} is required")]
    OrderTooLow { order: usize, needed: usize },

    #[error("moment vector is missing the entry for exponent {0:?}")]
    IncompleteMoments(Vec<u32>),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
