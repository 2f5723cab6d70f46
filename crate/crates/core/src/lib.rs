//! Optimal poisoning points and rank-one feature perturbations against least
//! squares regression, with the solvers they need.

// `!(x > 0.0)` style tests are deliberate: they reject NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bench;
pub mod error;
pub mod lasserre;
pub mod matkit;
pub mod onepoint;
pub mod pgd;
pub mod polyatk;
pub mod rankone;
pub mod regress;
pub mod sdpcore;

pub use error::{Error, Result};
