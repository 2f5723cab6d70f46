use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Exponent tuple α of a monomial x^α.
pub type Exponent = Vec<u32>;

pub fn degree(alpha: &[u32]) -> u32 {
    alpha.iter().sum()
}

/// Sparse real polynomial {α → p_α} in a fixed number of variables.
#[derive(Clone, PartialEq, Default)]
pub struct Polynomial {
    num_vars: usize,
    terms: BTreeMap<Exponent, f64>,
}

impl Polynomial {
    pub fn zero(num_vars: usize) -> Self {
        Polynomial {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_vars: usize, c: f64) -> Self {
        let mut p = Polynomial::zero(num_vars);
        p.add_term(vec![0; num_vars], c);
        p
    }

    pub fn from_terms(num_vars: usize, terms: impl IntoIterator<Item = (Exponent, f64)>) -> Result<Self> {
        let mut p = Polynomial::zero(num_vars);
        for (alpha, c) in terms {
            if alpha.len() != num_vars {
                return Err(Error::Dimension(format!(
                    "exponent of length {} in a {num_vars}-variable polynomial",
                    alpha.len()
                )));
            }
            p.add_term(alpha, c);
        }
        Ok(p)
    }

    /// Adds c·x^α; terms that cancel to exactly zero are dropped.
    pub fn add_term(&mut self, alpha: Exponent, c: f64) {
        assert_eq!(alpha.len(), self.num_vars, "exponent length");
        let entry = self.terms.entry(alpha.clone()).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&alpha);
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, f64)> {
        self.terms.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, alpha: &[u32]) -> f64 {
        self.terms.get(alpha).copied().unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coeff(&vec![0; self.num_vars])
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|a| degree(a)).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.num_vars);
        self.terms
            .iter()
            .map(|(alpha, c)| {
                c * alpha
                    .iter()
                    .zip(x)
                    .map(|(&e, &xi)| xi.powi(e as i32))
                    .product::<f64>()
            })
            .sum()
    }

    /// Terms in graded-lex order (the order of `monomial_basis`).
    pub fn graded_terms(&self) -> Vec<(Exponent, f64)> {
        let mut v: Vec<(Exponent, f64)> = self.terms.iter().map(|(k, c)| (k.clone(), *c)).collect();
        v.sort_by(|a, b| graded_lex_cmp(&a.0, &b.0));
        v
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        let mut p = Polynomial::zero(self.num_vars);
        for (k, v) in &self.terms {
            p.add_term(k.clone(), v * s);
        }
        p
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.num_vars, other.num_vars);
        let mut p = self.clone();
        for (k, v) in &other.terms {
            p.add_term(k.clone(), *v);
        }
        p
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.num_vars, other.num_vars);
        let mut p = Polynomial::zero(self.num_vars);
        for (a, u) in &self.terms {
            for (b, v) in &other.terms {
                let ab = a.iter().zip(b).map(|(x, y)| x + y).collect();
                p.add_term(ab, u * v);
            }
        }
        p
    }

    /// Largest |coefficient| over the non-constant terms.
    pub fn max_nonconstant_coeff(&self) -> f64 {
        self.terms
            .iter()
            .filter(|(k, _)| degree(k) > 0)
            .fold(0.0, |m, (_, v)| m.max(v.abs()))
    }

    /// p(s·x) as a polynomial in x.
    pub fn rescale_vars(&self, s: f64) -> Polynomial {
        let mut p = Polynomial::zero(self.num_vars);
        for (k, v) in &self.terms {
            p.add_term(k.clone(), v * s.powi(degree(k) as i32));
        }
        p
    }

    /// Parses the fixture format: one monomial per line, `coeff e1 e2 … en`.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse_text(num_vars: usize, text: &str) -> Result<Self> {
        let mut p = Polynomial::zero(num_vars);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split_whitespace();
            let coeff: f64 = fields
                .next()
                .unwrap()
                .parse()
                .map_err(|e| Error::Parse {
                    line: lineno + 1,
                    msg: format!("bad coefficient: {e}"),
                })?;
            let alpha: Vec<u32> = fields
                .map(|f| {
                    f.parse::<u32>().map_err(|e| Error::Parse {
                        line: lineno + 1,
                        msg: format!("bad exponent {f:?}: {e}"),
                    })
                })
                .collect::<Result<_>>()?;
            if alpha.len() != num_vars {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("expected {num_vars} exponents, found {}", alpha.len()),
                });
            }
            p.add_term(alpha, coeff);
        }
        Ok(p)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (alpha, c) in self.graded_terms() {
            out.push_str(&format!("{c:e}"));
            for e in alpha {
                out.push_str(&format!(" {e}"));
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial[")?;
        for (i, (alpha, c)) in self.graded_terms().into_iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}·x^{alpha:?}")?;
        }
        write!(f, "]")
    }
}

/// Degree first, then lexicographic with larger powers of x1 first.
pub fn graded_lex_cmp(a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    degree(a).cmp(&degree(b)).then_with(|| b.cmp(a))
}

/// All exponents of total degree ≤ `deg` in graded-lex order:
/// 1, x1, …, xn, x1², x1x2, …, xn^deg.
pub fn monomial_basis(n: usize, deg: u32) -> Vec<Exponent> {
    let mut out = Vec::new();
    for d in 0..=deg {
        let mut cur = vec![0u32; n];
        push_degree(n, d, 0, &mut cur, &mut out);
    }
    out
}

fn push_degree(n: usize, remaining: u32, pos: usize, cur: &mut Vec<u32>, out: &mut Vec<Exponent>) {
    if n == 0 {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if pos == n - 1 {
        cur[pos] = remaining;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        cur[pos] = e;
        push_degree(n, remaining - e, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

/// C(n + d, d)
pub fn basis_size(n: usize, d: u32) -> usize {
    let d = d as usize;
    let mut r: u128 = 1;
    for k in 1..=d {
        r = r * (n + k) as u128 / k as u128;
    }
    r as usize
}
