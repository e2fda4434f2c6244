//! Sparse multivariate Laurent polynomials with complex coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{q_eval_int, DilationMatrix, IVec};

/// `Σ_α a_α z^α` over a finite support. Exact zeros are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSymbol {
    dim: usize,
    terms: BTreeMap<IVec, Complex64>,
}

/// Serialized form of one term, `{"exp": [..], "c": [re, im]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub exp: IVec,
    pub c: Complex64,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl LaurentSymbol {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        Self::monomial(vec![0; dim], c)
    }

    pub fn monomial(exp: IVec, c: Complex64) -> Self {
        let mut s = Self::zero(exp.len());
        if c != zero() {
            s.terms.insert(exp, c);
        }
        s
    }

    /// Sums repeated exponents and drops exact zeros.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (IVec, Complex64)>,
    {
        let mut map: BTreeMap<IVec, Complex64> = BTreeMap::new();
        for (e, c) in terms {
            if e.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: e.len(),
                });
            }
            *map.entry(e).or_insert_with(zero) += c;
        }
        map.retain(|_, c| *c != zero());
        Ok(Self { dim, terms: map })
    }

    /// Real coefficients on consecutive exponents starting at `start` (univariate).
    pub fn from_real_coeffs(start: i64, coeffs: &[f64]) -> Self {
        Self::from_terms(
            1,
            coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| (vec![start + i as i64], Complex64::new(c, 0.0))),
        )
        .expect("univariate terms")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<IVec, Complex64> {
        &self.terms
    }

    pub fn iter(&self) -> impl Iterator<Item = (&IVec, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exp: &[i64]) -> Complex64 {
        self.terms.get(exp).copied().unwrap_or_else(zero)
    }

    /// Componentwise bounds of the support, `None` for the zero symbol.
    pub fn support_box(&self) -> Option<(IVec, IVec)> {
        let mut it = self.terms.keys();
        let first = it.next()?;
        let (mut lo, mut hi) = (first.clone(), first.clone());
        for e in it {
            for i in 0..self.dim {
                lo[i] = lo[i].min(e[i]);
                hi[i] = hi[i].max(e[i]);
            }
        }
        Some((lo, hi))
    }

    fn check_point(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: z.len(),
            });
        }
        if let Some(j) = z.iter().position(|c| *c == zero()) {
            return Err(Error::ZeroComponent(j));
        }
        Ok(())
    }

    fn monomial_at(e: &[i64], z: &[Complex64]) -> Complex64 {
        e.iter()
            .zip(z)
            .fold(Complex64::new(1.0, 0.0), |acc, (&p, zj)| {
                acc * zj.powi(p as i32)
            })
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        self.check_point(z)?;
        Ok(self
            .terms
            .iter()
            .map(|(e, c)| c * Self::monomial_at(e, z))
            .sum())
    }

    /// `z^γ D^γ a(z) = Σ_α a_α q_γ(α) z^α`.
    pub fn weighted_derivative(&self, gamma: &[u32], z: &[Complex64]) -> Result<Complex64> {
        self.check_point(z)?;
        if gamma.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: gamma.len(),
            });
        }
        Ok(self
            .terms
            .iter()
            .map(|(e, c)| {
                let q = q_eval_int(gamma, e);
                if q == 0.0 {
                    zero()
                } else {
                    c * q * Self::monomial_at(e, z)
                }
            })
            .sum())
    }

    /// Mixed partial derivative `D^γ a`.
    pub fn partial_derivative(&self, gamma: &[u32]) -> LaurentSymbol {
        let terms = self.terms.iter().filter_map(|(e, c)| {
            let q = q_eval_int(gamma, e);
            (q != 0.0).then(|| {
                let exp = e.iter().zip(gamma).map(|(&a, &g)| a - g as i64).collect();
                (exp, c * q)
            })
        });
        Self::from_terms(self.dim, terms).expect("same dimension")
    }

    /// Terms whose exponent lies in `eps + M Z^s`.
    pub fn sub_symbol(&self, eps: &[i64], m: &DilationMatrix) -> LaurentSymbol {
        let target = m.reduce(eps);
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| m.reduce(e) == target)
                .map(|(e, c)| (e.clone(), *c))
                .collect(),
        }
    }

    /// Sub-symbols for every canonical coset representative.
    pub fn decompose(&self, m: &DilationMatrix) -> Vec<(IVec, LaurentSymbol)> {
        let mut parts: BTreeMap<IVec, LaurentSymbol> = crate::lattice::coset_reps(m)
            .into_iter()
            .map(|r| (r, Self::zero(self.dim)))
            .collect();
        for (e, c) in &self.terms {
            parts
                .get_mut(&m.reduce(e))
                .expect("reduce lands on a representative")
                .terms
                .insert(e.clone(), *c);
        }
        parts.into_iter().collect()
    }

    /// `z^β a(z)`.
    pub fn shift(&self, beta: &[i64]) -> LaurentSymbol {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.iter().zip(beta).map(|(a, b)| a + b).collect(), *c))
                .collect(),
        }
    }

    pub fn add(&self, other: &LaurentSymbol) -> LaurentSymbol {
        Self::from_terms(
            self.dim,
            self.terms
                .iter()
                .chain(other.terms.iter())
                .map(|(e, c)| (e.clone(), *c)),
        )
        .expect("same dimension")
    }

    pub fn mul(&self, other: &LaurentSymbol) -> LaurentSymbol {
        let mut map: BTreeMap<IVec, Complex64> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: IVec = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *map.entry(e).or_insert_with(zero) += ca * cb;
            }
        }
        map.retain(|_, c| *c != zero());
        Self {
            dim: self.dim,
            terms: map,
        }
    }

    pub fn scale(&self, s: Complex64) -> LaurentSymbol {
        Self::from_terms(self.dim, self.terms.iter().map(|(e, c)| (e.clone(), c * s)))
            .expect("same dimension")
    }

    pub fn pow(&self, n: u32) -> LaurentSymbol {
        let mut acc = Self::constant(self.dim, Complex64::new(1.0, 0.0));
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// `a(e^{μ} z)`: the coefficient at `α` picks up `e^{μ·α}`.
    pub fn modulate(&self, mu: &[Complex64]) -> LaurentSymbol {
        Self::from_terms(
            self.dim,
            self.terms.iter().map(|(e, c)| {
                let phase: Complex64 = e.iter().zip(mu).map(|(&a, m)| m * a as f64).sum();
                (e.clone(), c * phase.exp())
            }),
        )
        .expect("same dimension")
    }

    /// Largest coefficient deviation between two symbols.
    pub fn max_abs_diff(&self, other: &LaurentSymbol) -> f64 {
        let keys: std::collections::BTreeSet<&IVec> =
            self.terms.keys().chain(other.terms.keys()).collect();
        keys.into_iter()
            .map(|e| (self.coeff(e) - other.coeff(e)).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_terms(&self) -> Vec<Term> {
        self.terms
            .iter()
            .map(|(e, c)| Term {
                exp: e.clone(),
                c: *c,
            })
            .collect()
    }

    pub fn from_term_list(dim: usize, terms: &[Term]) -> Result<Self> {
        Self::from_terms(dim, terms.iter().map(|t| (t.exp.clone(), t.c)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_terms()).expect("terms serialize")
    }

    pub fn from_json(dim: usize, s: &str) -> Result<Self> {
        let terms: Vec<Term> = serde_json::from_str(s)?;
        Self::from_term_list(dim, &terms)
    }
}

impl fmt::Display for LaurentSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if c.im == 0.0 {
                write!(f, "{}", c.re)?;
            } else {
                write!(f, "({}{:+}i)", c.re, c.im)?;
            }
            write!(f, "·z^{e:?}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one_plus(r: f64) -> LaurentSymbol {
        LaurentSymbol::from_terms(1, [(vec![0], c(1.0, 0.0)), (vec![1], c(r, 0.0))]).unwrap()
    }

    #[test]
    fn eval_examples() {
        let r = 1.7;
        assert_relative_eq!(one_plus(r).eval(&[c(1.0 / r, 0.0)]).unwrap().re, 2.0);
        let a = LaurentSymbol::monomial(vec![1, 1], c(1.0, 0.0));
        assert_eq!(a.eval(&[c(2.0, 0.0), c(0.0, 3.0)]).unwrap(), c(0.0, 6.0));
        assert!(matches!(
            a.eval(&[c(0.0, 0.0), c(1.0, 0.0)]),
            Err(Error::ZeroComponent(0))
        ));
        let inv = LaurentSymbol::monomial(vec![-2], c(1.0, 0.0));
        assert_eq!(inv.eval(&[c(2.0, 0.0)]).unwrap(), c(0.25, 0.0));
    }

    #[test]
    fn weighted_derivative_examples() {
        let a = LaurentSymbol::monomial(vec![2], c(1.0, 0.0));
        assert_eq!(
            a.weighted_derivative(&[1], &[c(3.0, 0.0)]).unwrap(),
            c(18.0, 0.0)
        );
        let b = one_plus(0.3).mul(&LaurentSymbol::monomial(vec![-3], c(2.0, 0.0)));
        let z = [c(0.7, 0.2)];
        assert_eq!(
            b.weighted_derivative(&[0], &z).unwrap(),
            b.eval(&z).unwrap()
        );
    }

    #[test]
    fn partial_derivative_examples() {
        let d = one_plus(1.0).partial_derivative(&[1]);
        assert_eq!(d, LaurentSymbol::constant(1, c(1.0, 0.0)));
        let z1z2 = LaurentSymbol::monomial(vec![1, 1], c(1.0, 0.0));
        assert_eq!(
            z1z2.partial_derivative(&[1, 0]),
            LaurentSymbol::monomial(vec![0, 1], c(1.0, 0.0))
        );
        let zi = LaurentSymbol::monomial(vec![-1], c(1.0, 0.0));
        assert_eq!(
            zi.partial_derivative(&[2]),
            LaurentSymbol::monomial(vec![-3], c(2.0, 0.0))
        );
    }

    #[test]
    fn sub_symbol_examples() {
        let m = DilationMatrix::scalar(2, 1).unwrap();
        let a = one_plus(0.4);
        assert_eq!(
            a.sub_symbol(&[0], &m),
            LaurentSymbol::constant(1, c(1.0, 0.0))
        );
        assert_eq!(
            a.sub_symbol(&[1], &m),
            LaurentSymbol::monomial(vec![1], c(0.4, 0.0))
        );
        assert_eq!(a.sub_symbol(&[3], &m), a.sub_symbol(&[1], &m));
        let total = a
            .decompose(&m)
            .into_iter()
            .fold(LaurentSymbol::zero(1), |acc, (_, s)| acc.add(&s));
        assert_eq!(total, a);
    }

    #[test]
    fn arithmetic_examples() {
        let a = one_plus(1.0);
        let want = LaurentSymbol::from_real_coeffs(2, &[1.0, 1.0]);
        assert_eq!(a.shift(&[2]), want);
        assert_eq!(
            a.mul(&a),
            LaurentSymbol::from_real_coeffs(0, &[1.0, 2.0, 1.0])
        );
        let r = 1.3;
        let geo = LaurentSymbol::from_real_coeffs(0, &[1.0, r, r * r]).pow(3);
        let (lo, hi) = geo.support_box().unwrap();
        assert_eq!((lo, hi), (vec![0], vec![6]));
        assert_relative_eq!(geo.coeff(&[6]).re, r.powi(6), max_relative = 1e-15);
        assert!(a
            .sub_symbol(&[0], &DilationMatrix::scalar(2, 1).unwrap())
            .add(&LaurentSymbol::constant(1, c(-1.0, 0.0)))
            .is_empty());
    }

    #[test]
    fn modulate_matches_scaled_argument() {
        let a = LaurentSymbol::from_real_coeffs(-2, &[0.5, -1.0, 2.0, 0.25]);
        let mu = [c(0.3, 0.1)];
        let z = [c(0.9, -0.4)];
        let lhs = a.modulate(&mu).eval(&z).unwrap();
        let rhs = a.eval(&[z[0] * mu[0].exp()]).unwrap();
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn json_round_trip() {
        let a = LaurentSymbol::from_terms(
            2,
            [
                (vec![-1, 2], c(0.1, -1.0 / 3.0)),
                (vec![0, 0], c(std::f64::consts::PI, 0.0)),
                (vec![3, -4], c(1e-300, 7.0)),
            ],
        )
        .unwrap();
        let back = LaurentSymbol::from_json(2, &a.to_json()).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn zero_pruning_is_exact() {
        let a = LaurentSymbol::from_terms(
            1,
            [
                (vec![0], c(1.0, 0.0)),
                (vec![0], c(-1.0, 0.0)),
                (vec![1], c(1e-300, 0.0)),
            ],
        )
        .unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a.coeff(&[1]), c(1e-300, 0.0));
    }
}
