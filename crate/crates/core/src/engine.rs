//! Subdivision operators on finitely supported lattice data.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{param_points, DilationMatrix, IVec, Parametrization};
use crate::scheme::SchemeSpec;
use crate::space::ExpPolyPair;
use crate::symbol::LaurentSymbol;

/// Data `f^{[k]}` on `Z^s`, tagged with its level and shift parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct GridData {
    pub dim: usize,
    pub level: usize,
    pub tau: Parametrization,
    pub values: BTreeMap<IVec, Complex64>,
}

impl GridData {
    pub fn new(dim: usize, level: usize, tau: Parametrization) -> Self {
        Self {
            dim,
            level,
            tau,
            values: BTreeMap::new(),
        }
    }

    /// `δ` at the origin.
    pub fn delta(dim: usize, level: usize, tau: Parametrization) -> Self {
        let mut g = Self::new(dim, level, tau);
        g.values.insert(vec![0; dim], Complex64::new(1.0, 0.0));
        g
    }

    pub fn get(&self, idx: &[i64]) -> Option<Complex64> {
        self.values.get(idx).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Parameter points `t_α = M^{-k}(α + τ)` for every stored index, in index order.
    pub fn points(&self, m: &DilationMatrix) -> Result<Vec<Vec<f64>>> {
        let idx: Vec<IVec> = self.values.keys().cloned().collect();
        param_points(m, &self.tau, self.level, &idx)
    }
}

/// Inclusive integer box `∏ [lo_i, hi_i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub lo: IVec,
    pub hi: IVec,
}

impl Window {
    pub fn new(lo: IVec, hi: IVec) -> Self {
        Self { lo, hi }
    }

    pub fn cube(dim: usize, radius: i64) -> Self {
        Self::new(vec![-radius; dim], vec![radius; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (l, h))| (l..=h).contains(&x))
    }

    /// Lattice points in lexicographic order.
    pub fn points(&self) -> Vec<IVec> {
        let mut out = vec![vec![]];
        for (&l, &h) in self.lo.iter().zip(&self.hi) {
            out = out
                .into_iter()
                .flat_map(|p: IVec| {
                    (l..=h).map(move |x| {
                        let mut p = p.clone();
                        p.push(x);
                        p
                    })
                })
                .collect();
        }
        out
    }
}

fn check_dims(mask: &LaurentSymbol, m: &DilationMatrix, f: &GridData) -> Result<()> {
    for found in [mask.dim(), f.dim] {
        if found != m.dim() {
            return Err(Error::DimensionMismatch {
                expected: m.dim(),
                found,
            });
        }
    }
    Ok(())
}

/// `(S_a f)_α = Σ_β a_{α-Mβ} f_β`.
///
/// Each output coset is assembled on its own thread; within a point the
/// terms are added in ascending `β`, the same order as [`apply_operator_direct`].
pub fn apply_operator(mask: &LaurentSymbol, m: &DilationMatrix, f: &GridData) -> Result<GridData> {
    check_dims(mask, m, f)?;
    let mut by_coset: BTreeMap<IVec, Vec<(&IVec, Complex64)>> = BTreeMap::new();
    for (e, c) in mask.iter() {
        by_coset.entry(m.reduce(e)).or_default().push((e, *c));
    }
    let images: Vec<(IVec, Complex64)> = f.values.iter().map(|(b, v)| (m.apply(b), *v)).collect();
    let parts: Vec<BTreeMap<IVec, Complex64>> = by_coset
        .par_iter()
        .map(|(_, taps)| {
            let mut out: BTreeMap<IVec, Complex64> = BTreeMap::new();
            for (mb, fv) in &images {
                for (e, c) in taps {
                    let alpha: IVec = e.iter().zip(mb).map(|(x, y)| x + y).collect();
                    let slot = out.entry(alpha).or_insert(Complex64::new(0.0, 0.0));
                    *slot += c * fv;
                }
            }
            out
        })
        .collect();
    let mut values = BTreeMap::new();
    for p in parts {
        values.extend(p);
    }
    Ok(GridData {
        dim: f.dim,
        level: f.level + 1,
        tau: f.tau.clone(),
        values,
    })
}

/// Reference double loop over output points and input points.
pub fn apply_operator_direct(
    mask: &LaurentSymbol,
    m: &DilationMatrix,
    f: &GridData,
) -> Result<GridData> {
    check_dims(mask, m, f)?;
    let mut support = std::collections::BTreeSet::new();
    for b in f.values.keys() {
        let mb = m.apply(b);
        for e in mask.terms().keys() {
            support.insert(e.iter().zip(&mb).map(|(x, y)| x + y).collect::<IVec>());
        }
    }
    let mut values = BTreeMap::new();
    for alpha in support {
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, fv) in &f.values {
            let mb = m.apply(b);
            let e: IVec = alpha.iter().zip(&mb).map(|(x, y)| x - y).collect();
            if let Some(c) = mask.terms().get(&e) {
                acc += c * fv;
            }
        }
        values.insert(alpha, acc);
    }
    Ok(GridData {
        dim: f.dim,
        level: f.level + 1,
        tau: f.tau.clone(),
        values,
    })
}

/// Applies `a^{[ℓ]}, …, a^{[ℓ+n-1]}` to data that sits at level `ℓ`.
pub fn refine(
    scheme: &SchemeSpec,
    f0: &GridData,
    start_level: usize,
    rounds: usize,
) -> Result<GridData> {
    if f0.level != start_level {
        return Err(Error::LevelMismatch {
            expected: start_level,
            found: f0.level,
        });
    }
    let mut f = f0.clone();
    for k in start_level..start_level + rounds {
        f = apply_operator(&scheme.symbol_at(k)?, &scheme.dilation, &f)?;
    }
    Ok(f)
}

/// Samples of `x^γ e^{λ·x}` at `t_α^{[k]}` over a window.
pub fn sample_exp_poly(
    pair: &ExpPolyPair,
    m: &DilationMatrix,
    tau: &Parametrization,
    k: usize,
    window: &Window,
) -> Result<GridData> {
    let dim = m.dim();
    for found in [pair.gamma.len(), pair.lambda.len(), window.dim()] {
        if found != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found,
            });
        }
    }
    let idx = window.points();
    let pts = param_points(m, tau, k, &idx)?;
    let mut g = GridData::new(dim, k, tau.clone());
    for (a, t) in idx.into_iter().zip(pts) {
        g.values.insert(a, pair.eval(&t));
    }
    Ok(g)
}

/// Refines `δ` for `rounds` steps from level `start_level` and pairs each value
/// with its parameter point.
pub fn basic_limit_samples(
    scheme: &SchemeSpec,
    rounds: usize,
    start_level: usize,
) -> Result<Vec<(Vec<f64>, Complex64)>> {
    let tau = scheme
        .tau
        .clone()
        .unwrap_or_else(|| Parametrization::zero(scheme.dim()));
    let f0 = GridData::delta(scheme.dim(), start_level, tau);
    let f = refine(scheme, &f0, start_level, rounds)?;
    let pts = f.points(&scheme.dilation)?;
    Ok(pts.into_iter().zip(f.values.values().copied()).collect())
}

/// `a_{Mα} = δ_{α,0}`, compared exactly.
pub fn is_interpolatory(mask: &LaurentSymbol, m: &DilationMatrix) -> bool {
    let origin = vec![0; m.dim()];
    if mask.coeff(&origin) != Complex64::new(1.0, 0.0) {
        return false;
    }
    mask.iter()
        .all(|(e, c)| !m.in_lattice(e) || *e == origin || *c == Complex64::new(0.0, 0.0))
}

/// Output indices of one step on data supported in `window` whose whole
/// stencil `{β : a_{α-Mβ} ≠ 0}` lies inside the window.
pub fn valid_interior(mask: &LaurentSymbol, m: &DilationMatrix, window: &Window) -> Vec<IVec> {
    let mut candidates = std::collections::BTreeSet::new();
    for b in window.points() {
        let mb = m.apply(&b);
        for e in mask.terms().keys() {
            candidates.insert(e.iter().zip(&mb).map(|(x, y)| x + y).collect::<IVec>());
        }
    }
    candidates
        .into_iter()
        .filter(|alpha| {
            mask.terms().keys().all(|e| {
                let d: IVec = alpha.iter().zip(e).map(|(x, y)| x - y).collect();
                match m.solve_exact(&d) {
                    Some(beta) => window.contains(&beta),
                    None => true,
                }
            })
        })
        .collect()
}
