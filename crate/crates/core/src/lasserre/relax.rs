use super::moments::{add_exp, half_degree, moment_matrix, MomentVector, MonomialIndex};
use super::poly::{monomial_basis, Polynomial};
use crate::error::{Error, Result};
use crate::matkit::{self, Matrix};
use crate::sdpcore::{solve_sdp_with, LmiBlock, SdpOptions, SdpProblem, SdpSolution, SdpStatus};

/// Relative eigenvalue cut used for every numerical rank in this module.
pub const RANK_THRESHOLD: f64 = 1e-6;

/// min f(x) subject to g_i(x) ≥ 0 for each constraint.
#[derive(Clone, Debug)]
pub struct PolynomialProgram {
    pub objective: Polynomial,
    pub constraints: Vec<Polynomial>,
}

impl PolynomialProgram {
    pub fn new(objective: Polynomial, constraints: Vec<Polynomial>) -> Result<Self> {
        if objective.is_empty() {
            return Err(Error::InvalidArgument("empty objective".into()));
        }
        let n = objective.num_vars();
        if constraints.iter().any(|g| g.num_vars() != n) {
            return Err(Error::Dimension("constraint variable count differs from the objective".into()));
        }
        Ok(PolynomialProgram {
            objective,
            constraints,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.num_vars()
    }

    /// max ⌈deg g_i / 2⌉ over constraints, at least 1.
    pub fn w_max(&self) -> u32 {
        self.constraints.iter().map(half_degree).max().unwrap_or(0).max(1)
    }

    pub fn min_order(&self) -> u32 {
        self.objective
            .degree()
            .div_ceil(2)
            .max(self.constraints.iter().map(half_degree).max().unwrap_or(0))
            .max(1)
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        self.constraints.iter().all(|g| g.eval(x) >= -tol)
    }

    /// True for one constraint of the form c − (negative definite quadratic
    /// plus linear terms), i.e. a bounded ellipsoid. Anything else is solved
    /// all the same but convergence of the hierarchy is not known.
    pub fn compactness_verified(&self) -> bool {
        let [g] = self.constraints.as_slice() else {
            return false;
        };
        if g.degree() != 2 {
            return false;
        }
        let n = g.num_vars();
        let mut q = Matrix::zeros(n, n);
        for (alpha, c) in g.terms() {
            let hits: Vec<usize> = (0..n).filter(|&j| alpha[j] > 0).collect();
            match (hits.as_slice(), crate::lasserre::degree(alpha)) {
                ([j], 2) => q[(*j, *j)] += c,
                ([i, j], 2) => {
                    q[(*i, *j)] += 0.5 * c;
                    q[(*j, *i)] += 0.5 * c;
                }
                _ => {}
            }
        }
        matkit::sym_eig(&q).map(|e| e.max() < 0.0).unwrap_or(false)
    }
}

/// The SDP at a fixed order: unknowns are y_α for 1 ≤ |α| ≤ 2N, y_0 = 1
/// is folded into the constant terms.
#[derive(Clone, Debug)]
pub struct Relaxation {
    pub order: u32,
    pub index: MonomialIndex,
    pub sdp: SdpProblem,
    /// f_0, added to the SDP objective
    pub offset: f64,
    pub w_max: u32,
}

impl Relaxation {
    /// Moment vector with y_0 = 1 prepended to the SDP unknowns.
    pub fn moments_from(&self, y: &[f64]) -> Result<MomentVector> {
        let mut values = Vec::with_capacity(y.len() + 1);
        values.push(1.0);
        values.extend_from_slice(y);
        MomentVector::new(self.index.num_vars(), self.order, values)
    }
}

fn push_entry(blk: &mut LmiBlock, index: &MonomialIndex, i: usize, j: usize, c: f64, alpha: &[u32]) {
    match index.position(alpha) {
        Some(0) => blk.add_constant(i, j, c),
        Some(p) => blk.add_coeff(p - 1, i, j, c),
        None => unreachable!("exponent beyond the relaxation degree"),
    }
}

/// Order-N moment relaxation: moment block plus one localizing block per constraint.
pub fn relax(program: &PolynomialProgram, order: u32) -> Result<Relaxation> {
    let needed = program.min_order();
    if order < needed {
        return Err(Error::OrderTooLow {
            order: order as usize,
            needed: needed as usize,
        });
    }
    if !program.compactness_verified() {
        log::warn!(
            "compactness of the feasible set is not verified for {} constraint(s); the hierarchy may not converge",
            program.constraints.len()
        );
    }
    let n = program.num_vars();
    let index = MonomialIndex::new(n, 2 * order);
    let dim_y = index.len() - 1;
    let mut cost = vec![0.0; dim_y];
    let mut offset = 0.0;
    for (alpha, c) in program.objective.terms() {
        match index.position(alpha) {
            Some(0) => offset += c,
            Some(p) => cost[p - 1] += c,
            None => unreachable!("objective degree checked against the order"),
        }
    }

    let mut blocks = Vec::with_capacity(1 + program.constraints.len());
    let basis = monomial_basis(n, order);
    let mut moment = LmiBlock::new(basis.len());
    for i in 0..basis.len() {
        for j in i..basis.len() {
            push_entry(&mut moment, &index, i, j, 1.0, &add_exp(&basis[i], &basis[j]));
        }
    }
    blocks.push(moment);

    for g in &program.constraints {
        let local = monomial_basis(n, order - half_degree(g));
        let terms = g.graded_terms();
        let mut blk = LmiBlock::new(local.len());
        for i in 0..local.len() {
            for j in i..local.len() {
                let ab = add_exp(&local[i], &local[j]);
                for (beta, c) in &terms {
                    push_entry(&mut blk, &index, i, j, *c, &add_exp(&ab, beta));
                }
            }
        }
        blocks.push(blk);
    }

    Ok(Relaxation {
        order,
        index,
        sdp: SdpProblem { dim_y, cost, blocks },
        offset,
        w_max: program.w_max(),
    })
}

#[derive(Clone, Debug)]
pub struct LasserreSolution {
    pub order: u32,
    /// relaxation value, a lower bound on the program minimum
    pub bound: f64,
    pub moments: MomentVector,
    pub w_max: u32,
    pub sdp: SdpSolution,
}

impl LasserreSolution {
    pub fn converged(&self) -> bool {
        self.sdp.status == SdpStatus::Optimal
    }
}

pub fn solve_relaxation(program: &PolynomialProgram, order: u32, opts: &SdpOptions) -> Result<LasserreSolution> {
    let relaxation = relax(program, order)?;
    let sdp = solve_sdp_with(&relaxation.sdp, opts)?;
    if sdp.status == SdpStatus::Infeasible {
        return Err(Error::Numerical(format!("order {order} relaxation reported infeasible or unbounded")));
    }
    let moments = relaxation.moments_from(&sdp.y_star)?;
    Ok(LasserreSolution {
        order,
        bound: sdp.value + relaxation.offset,
        moments,
        w_max: relaxation.w_max,
        sdp,
    })
}

/// Among moment vectors whose relaxed objective is at most `level`, the one
/// with the smallest trace of the moment matrix. When the optimum is attained
/// on a continuum the interior-point solution of the plain relaxation has
/// high rank; this second pass tends to land on the atomic measure at the
/// minimizers of smallest monomial norm, which can pass the flat test.
/// `bound` of the result is `level`.
pub fn solve_min_trace(
    program: &PolynomialProgram,
    order: u32,
    level: f64,
    opts: &SdpOptions,
) -> Result<LasserreSolution> {
    let mut relaxation = relax(program, order)?;
    let sdp = &mut relaxation.sdp;
    let mut cap = LmiBlock::new(1);
    cap.add_constant(0, 0, level - relaxation.offset);
    for (k, &c) in sdp.cost.iter().enumerate() {
        if c != 0.0 {
            cap.add_coeff(k, 0, 0, -c);
        }
    }
    sdp.blocks.push(cap);
    let mut trace = vec![0.0; sdp.dim_y];
    for a in monomial_basis(program.num_vars(), order) {
        if let Some(p) = relaxation.index.position(&add_exp(&a, &a)).filter(|&p| p > 0) {
            trace[p - 1] += 1.0;
        }
    }
    sdp.cost = trace;
    let sol = solve_sdp_with(sdp, opts)?;
    if sol.status == SdpStatus::Infeasible {
        return Err(Error::Numerical(format!("no moment vector at order {order} reaches level {level:e}")));
    }
    let moments = relaxation.moments_from(&sol.y_star)?;
    Ok(LasserreSolution {
        order,
        bound: level,
        moments,
        w_max: relaxation.w_max,
        sdp: sol,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    /// rank M_N(y) = rank M_{N−w}(y)
    pub rank_ok: bool,
    pub rank_full: usize,
    pub rank_reduced: usize,
    /// present only when the certified rank is one
    pub minimizer: Option<Vec<f64>>,
}

fn rank_of(m: &Matrix) -> Result<usize> {
    Ok(matkit::sym_eig(m)?.numerical_rank(RANK_THRESHOLD))
}

/// Flat-extension test and rank-one extraction.
pub fn certify_and_extract(y: &MomentVector, order: u32, w_max: u32) -> Result<Certificate> {
    let rank_full = rank_of(&moment_matrix(y, order)?)?;
    let rank_reduced = if order >= w_max {
        rank_of(&moment_matrix(y, order - w_max)?)?
    } else {
        0
    };
    let rank_ok = order >= w_max && rank_full == rank_reduced;
    let minimizer = (rank_ok && rank_full == 1).then(|| y.first_moments());
    Ok(Certificate {
        rank_ok,
        rank_full,
        rank_reduced,
        minimizer,
    })
}

/// For programs invariant under x → −x: when the centred second-moment
/// matrix has rank one the optimum sits on ±√λ₁ v₁.
pub fn extract_symmetric_pair(y: &MomentVector) -> Result<Option<[Vec<f64>; 2]>> {
    let first = y.first_moments();
    let mut second = y.second_moments();
    second.add_scaled(-1.0, &Matrix::outer(&first, &first));
    let eig = matkit::sym_eig(&second.symmetrized())?;
    if eig.max() <= 0.0 || eig.numerical_rank(RANK_THRESHOLD) != 1 {
        return Ok(None);
    }
    let v = matkit::scaled(eig.max().sqrt(), &eig.vector(0));
    let plus = matkit::add(&first, &v);
    let minus = matkit::sub(&first, &v);
    Ok(Some([plus, minus]))
}
