use std::collections::HashMap;

use super::poly::{basis_size, monomial_basis, Exponent, Polynomial};
use crate::error::{Error, Result};
use crate::matkit::Matrix;

/// Graded-lex list of all monomials up to a degree, with reverse lookup.
#[derive(Clone, Debug)]
pub struct MonomialIndex {
    num_vars: usize,
    max_degree: u32,
    monomials: Vec<Exponent>,
    lookup: HashMap<Exponent, usize>,
}

impl MonomialIndex {
    pub fn new(num_vars: usize, max_degree: u32) -> Self {
        let monomials = monomial_basis(num_vars, max_degree);
        let lookup = monomials.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        MonomialIndex {
            num_vars,
            max_degree,
            monomials,
            lookup,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Exponent] {
        &self.monomials
    }

    pub fn position(&self, alpha: &[u32]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }
}

pub(crate) fn add_exp(a: &[u32], b: &[u32]) -> Exponent {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Pseudo-moments y_α for |α| ≤ 2N in graded-lex order; y_0 = 1.
#[derive(Clone, Debug)]
pub struct MomentVector {
    order: u32,
    index: MonomialIndex,
    values: Vec<f64>,
}

impl MomentVector {
    /// Wraps values listed in graded-lex order up to degree 2·order.
    pub fn new(num_vars: usize, order: u32, values: Vec<f64>) -> Result<Self> {
        let index = MonomialIndex::new(num_vars, 2 * order);
        if values.len() != index.len() {
            return Err(Error::Dimension(format!(
                "{} moments supplied, {} needed for order {order} in {num_vars} variables",
                values.len(),
                index.len()
            )));
        }
        if (values[0] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "zeroth moment must be 1, got {}",
                values[0]
            )));
        }
        Ok(MomentVector {
            order,
            index,
            values,
        })
    }

    /// Moments of Σ w_k δ_{x_k}; weights must sum to one.
    pub fn from_atoms(points: &[Vec<f64>], weights: &[f64], order: u32) -> Result<Self> {
        let n = points.first().map_or(0, Vec::len);
        if points.len() != weights.len() || points.iter().any(|p| p.len() != n) {
            return Err(Error::Dimension("atoms and weights disagree".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("weights sum to {total}, not 1")));
        }
        let index = MonomialIndex::new(n, 2 * order);
        let values = index
            .monomials()
            .iter()
            .map(|alpha| {
                points
                    .iter()
                    .zip(weights)
                    .map(|(p, w)| w * monomial_value(alpha, p))
                    .sum()
            })
            .collect();
        Ok(MomentVector {
            order,
            index,
            values,
        })
    }

    pub fn dirac(point: &[f64], order: u32) -> Self {
        MomentVector::from_atoms(&[point.to_vec()], &[1.0], order).expect("single atom")
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn num_vars(&self) -> usize {
        self.index.num_vars()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn index(&self) -> &MonomialIndex {
        &self.index
    }

    pub fn get(&self, alpha: &[u32]) -> Result<f64> {
        self.index
            .position(alpha)
            .map(|i| self.values[i])
            .ok_or_else(|| Error::IncompleteMoments(alpha.to_vec()))
    }

    /// y_{e_j} for every variable.
    pub fn first_moments(&self) -> Vec<f64> {
        let n = self.num_vars();
        (0..n)
            .map(|j| {
                let mut e = vec![0; n];
                e[j] = 1;
                self.get(&e).unwrap_or(0.0)
            })
            .collect()
    }

    /// [y_{e_i + e_j}]
    pub fn second_moments(&self) -> Matrix {
        let n = self.num_vars();
        Matrix::from_fn(n, n, |i, j| {
            let mut e = vec![0; n];
            e[i] += 1;
            e[j] += 1;
            self.get(&e).unwrap_or(0.0)
        })
    }
}

pub fn monomial_value(alpha: &[u32], x: &[f64]) -> f64 {
    alpha.iter().zip(x).map(|(&e, &v)| v.powi(e as i32)).product()
}

/// Symbolic moment matrix: entry (i, j) is the exponent α_i + α_j.
pub fn moment_matrix_pattern(num_vars: usize, order: u32) -> Vec<Vec<Exponent>> {
    let basis = monomial_basis(num_vars, order);
    basis
        .iter()
        .map(|a| basis.iter().map(|b| add_exp(a, b)).collect())
        .collect()
}

/// Symbolic localizing matrix of size s(order): entry (i, j) lists
/// (g_β, α_i + α_j + β) over the terms of g in graded-lex order.
pub fn localizing_matrix_pattern(g: &Polynomial, order: u32) -> Vec<Vec<Vec<(f64, Exponent)>>> {
    let basis = monomial_basis(g.num_vars(), order);
    let terms = g.graded_terms();
    basis
        .iter()
        .map(|a| {
            basis
                .iter()
                .map(|b| {
                    let ab = add_exp(a, b);
                    terms.iter().map(|(beta, c)| (*c, add_exp(&ab, beta))).collect()
                })
                .collect()
        })
        .collect()
}

/// ⌈deg g / 2⌉
pub fn half_degree(g: &Polynomial) -> u32 {
    g.degree().div_ceil(2)
}

/// M_N(y), indexed by the graded-lex basis of degree N.
pub fn moment_matrix(y: &MomentVector, order: u32) -> Result<Matrix> {
    let pat = moment_matrix_pattern(y.num_vars(), order);
    let s = pat.len();
    let mut m = Matrix::zeros(s, s);
    for i in 0..s {
        for j in i..s {
            let v = y.get(&pat[i][j])?;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// M_{N−w}(g y) with w = ⌈deg g / 2⌉.
pub fn localizing_matrix(y: &MomentVector, g: &Polynomial, order: u32) -> Result<Matrix> {
    let w = half_degree(g);
    if order < w {
        return Err(Error::OrderTooLow {
            order: order as usize,
            needed: w as usize,
        });
    }
    if g.num_vars() != y.num_vars() {
        return Err(Error::Dimension("polynomial and moments use different variable counts".into()));
    }
    let pat = localizing_matrix_pattern(g, order - w);
    let s = pat.len();
    debug_assert_eq!(s, basis_size(g.num_vars(), order - w));
    let mut m = Matrix::zeros(s, s);
    for i in 0..s {
        for j in i..s {
            let mut v = 0.0;
            for (c, alpha) in &pat[i][j] {
                v += c * y.get(alpha)?;
            }
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}
