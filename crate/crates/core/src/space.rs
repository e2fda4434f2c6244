//! Finite sets `Q` of pairs `(γ, λ)` spanning `x^γ e^{λ·x}`.

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpPolyPair {
    pub gamma: Vec<u32>,
    pub lambda: Vec<Complex64>,
}

impl ExpPolyPair {
    pub fn new(gamma: Vec<u32>, lambda: Vec<Complex64>) -> Self {
        Self { gamma, lambda }
    }

    /// Evaluates `x^γ e^{λ·x}`.
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let poly: f64 = self
            .gamma
            .iter()
            .zip(x)
            .map(|(&g, &t)| t.powi(g as i32))
            .product();
        let phase: Complex64 = self.lambda.iter().zip(x).map(|(l, &t)| l * t).sum();
        phase.exp() * poly
    }
}

/// Downward closed (in `γ`, per `λ`) set of pairs in canonical order:
/// by `λ` (real parts, then imaginary parts), then by `|γ|`, then lexicographically.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpPolySpace {
    dim: usize,
    pairs: Vec<ExpPolyPair>,
}

pub(crate) fn cmp_lambda(a: &[Complex64], b: &[Complex64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn cmp_gamma(a: &[u32], b: &[u32]) -> Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

fn below(gamma: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for &g in gamma {
        out = out
            .into_iter()
            .flat_map(|p: Vec<u32>| {
                (0..=g).map(move |x| {
                    let mut p = p.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }
    out
}

impl ExpPolySpace {
    /// Builds the space, adding any missing `γ' ≤ γ` with a warning.
    pub fn new(dim: usize, pairs: Vec<ExpPolyPair>) -> Result<Self> {
        for p in &pairs {
            for len in [p.gamma.len(), p.lambda.len()] {
                if len != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: len,
                    });
                }
            }
            if p.lambda
                .iter()
                .any(|l| !l.re.is_finite() || !l.im.is_finite())
            {
                return Err(Error::InvalidParameter("lambda must be finite".into()));
            }
        }
        let given = pairs.len();
        let mut all: Vec<ExpPolyPair> = Vec::new();
        for p in &pairs {
            for g in below(&p.gamma) {
                let q = ExpPolyPair::new(g, p.lambda.clone());
                if !all.contains(&q) {
                    all.push(q);
                }
            }
        }
        let distinct_given = {
            let mut seen: Vec<&ExpPolyPair> = Vec::new();
            for p in &pairs {
                if !seen.contains(&p) {
                    seen.push(p);
                }
            }
            seen.len()
        };
        if all.len() > distinct_given {
            log::warn!(
                "space is not downward closed; added {} pair(s) to the {} given",
                all.len() - distinct_given,
                given
            );
        }
        all.sort_by(|a, b| {
            cmp_lambda(&a.lambda, &b.lambda).then_with(|| cmp_gamma(&a.gamma, &b.gamma))
        });
        Ok(Self { dim, pairs: all })
    }

    /// `Γ × Λ`.
    pub fn product(dim: usize, gammas: &[Vec<u32>], lambdas: &[Vec<Complex64>]) -> Result<Self> {
        let pairs = lambdas
            .iter()
            .flat_map(|l| {
                gammas
                    .iter()
                    .map(move |g| ExpPolyPair::new(g.clone(), l.clone()))
            })
            .collect();
        Self::new(dim, pairs)
    }

    /// All multi-indices with `|γ| ≤ degree`.
    pub fn total_degree(dim: usize, degree: u32) -> Vec<Vec<u32>> {
        below(&vec![degree; dim])
            .into_iter()
            .filter(|g| g.iter().sum::<u32>() <= degree)
            .collect()
    }

    /// Polynomials of total degree at most `degree`.
    pub fn polynomials(dim: usize, degree: u32) -> Self {
        let zero = vec![Complex64::new(0.0, 0.0); dim];
        Self::product(dim, &Self::total_degree(dim, degree), &[zero]).expect("consistent dimension")
    }

    /// `{x^γ e^{λ·x} : |γ| ≤ degree}` for one `λ`.
    pub fn exp_polynomials(lambda: Vec<Complex64>, degree: u32) -> Self {
        let dim = lambda.len();
        Self::product(dim, &Self::total_degree(dim, degree), &[lambda])
            .expect("consistent dimension")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pairs(&self) -> &[ExpPolyPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Distinct `λ` values in canonical order.
    pub fn lambdas(&self) -> Vec<Vec<Complex64>> {
        let mut out: Vec<Vec<Complex64>> = Vec::new();
        for p in &self.pairs {
            if out.last() != Some(&p.lambda) {
                out.push(p.lambda.clone());
            }
        }
        out
    }

    pub fn contains(&self, gamma: &[u32], lambda: &[Complex64]) -> bool {
        self.pairs
            .iter()
            .any(|p| p.gamma == gamma && p.lambda == lambda)
    }

    pub fn union(&self, other: &ExpPolySpace) -> Result<Self> {
        Self::new(
            self.dim,
            self.pairs.iter().chain(&other.pairs).cloned().collect(),
        )
    }
}
