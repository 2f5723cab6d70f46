//! Moment relaxations of polynomial programs.

mod moments;
mod poly;
mod relax;

pub use moments::{
    half_degree, localizing_matrix, localizing_matrix_pattern, moment_matrix, moment_matrix_pattern,
    monomial_value, MomentVector, MonomialIndex,
};
pub use poly::{basis_size, degree, graded_lex_cmp, monomial_basis, Exponent, Polynomial};
pub use relax::{
    certify_and_extract, extract_symmetric_pair, relax, solve_min_trace, solve_relaxation, Certificate, LasserreSolution,
    PolynomialProgram, Relaxation, RANK_THRESHOLD,
};
