use crate::error::{Error, Result};
use crate::matkit::Matrix;

/// One linear matrix inequality C + Σ_k y_k F_k ⪰ 0. Only entries with
/// `row <= col` are stored; the mirror entry is implied.
#[derive(Clone, Debug, Default)]
pub struct LmiBlock {
    pub dim: usize,
    pub constant: Vec<(usize, usize, f64)>,
    /// (variable, row, col, value)
    pub coeffs: Vec<(usize, usize, usize, f64)>,
}

impl LmiBlock {
    pub fn new(dim: usize) -> Self {
        LmiBlock {
            dim,
            ..Default::default()
        }
    }

    /// Adds `value` to entry (i, j) and its mirror of the constant term.
    pub fn add_constant(&mut self, i: usize, j: usize, value: f64) {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        self.constant.push((r, c, value));
    }

    pub fn add_coeff(&mut self, var: usize, i: usize, j: usize, value: f64) {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        self.coeffs.push((var, r, c, value));
    }

    /// C + Σ y_k F_k as a dense symmetric matrix.
    pub fn eval(&self, y: &[f64]) -> Matrix {
        let mut m = Matrix::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.constant {
            m[(i, j)] += v;
            if i != j {
                m[(j, i)] += v;
            }
        }
        for &(k, i, j, v) in &self.coeffs {
            let t = v * y[k];
            m[(i, j)] += t;
            if i != j {
                m[(j, i)] += t;
            }
        }
        m
    }
}

/// min cost^T y  subject to every block ⪰ 0.
#[derive(Clone, Debug, Default)]
pub struct SdpProblem {
    pub dim_y: usize,
    pub cost: Vec<f64>,
    pub blocks: Vec<LmiBlock>,
}

impl SdpProblem {
    pub fn validate(&self) -> Result<()> {
        if self.cost.len() != self.dim_y {
            return Err(Error::Dimension(format!(
                "cost has {} entries for {} variables",
                self.cost.len(),
                self.dim_y
            )));
        }
        for (b, blk) in self.blocks.iter().enumerate() {
            let bad_pos = |i: usize, j: usize| i >= blk.dim || j >= blk.dim;
            if blk.constant.iter().any(|&(i, j, _)| bad_pos(i, j))
                || blk.coeffs.iter().any(|&(_, i, j, _)| bad_pos(i, j))
            {
                return Err(Error::Dimension(format!("block {b} has an entry outside its dimension")));
            }
            if blk.coeffs.iter().any(|&(k, ..)| k >= self.dim_y) {
                return Err(Error::Dimension(format!("block {b} references a missing variable")));
            }
            if blk.constant.iter().any(|e| !e.2.is_finite()) || blk.coeffs.iter().any(|e| !e.3.is_finite()) {
                return Err(Error::InvalidArgument(format!("block {b} has a non-finite entry")));
            }
        }
        if self.cost.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite cost".into()));
        }
        Ok(())
    }

    pub fn objective(&self, y: &[f64]) -> f64 {
        crate::matkit::dot(&self.cost, y)
    }

    /// Smallest eigenvalue over all blocks at `y`.
    pub fn min_block_eig(&self, y: &[f64]) -> Result<f64> {
        let mut worst = f64::INFINITY;
        for blk in &self.blocks {
            let e = crate::matkit::sym_eig(&blk.eval(y))?;
            worst = worst.min(e.min());
        }
        Ok(worst)
    }
}
