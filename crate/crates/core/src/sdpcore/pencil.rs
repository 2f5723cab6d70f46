use crate::error::{Error, Result};
use crate::matkit::{self, Matrix};

/// λ_min(M0 + Σ t_k M_k).
pub fn min_eig_affine(m0: &Matrix, directions: &[Matrix], t: &[f64]) -> Result<f64> {
    Ok(matkit::sym_eig(&affine_combination(m0, directions, t)?)?.min())
}

pub fn affine_combination(m0: &Matrix, directions: &[Matrix], t: &[f64]) -> Result<Matrix> {
    if directions.len() != t.len() {
        return Err(Error::Dimension(format!(
            "{} directions but {} parameters",
            directions.len(),
            t.len()
        )));
    }
    let mut out = m0.clone();
    for (d, &tk) in directions.iter().zip(t) {
        if d.rows() != m0.rows() || d.cols() != m0.cols() {
            return Err(Error::Dimension("pencil direction shape differs from M0".into()));
        }
        out.add_scaled(tk, d);
    }
    Ok(out)
}
