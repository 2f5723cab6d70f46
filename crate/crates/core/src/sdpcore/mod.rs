//! Dense semidefinite programming, the trust-region subproblem and
//! minimum-eigenvalue evaluation over affine matrix families.

pub mod dense;
mod ipm;
mod pencil;
mod problem;
mod trust;

pub use ipm::{solve_sdp, solve_sdp_with, IterRecord, SdpOptions, SdpSolution, SdpStatus};
pub use pencil::{affine_combination, min_eig_affine};
pub use problem::{LmiBlock, SdpProblem};
pub use trust::{trust_region, TrustRegionResult};
