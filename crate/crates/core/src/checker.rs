//! Algebraic generation and reproduction conditions, the shift parameter
//! solver, per-level normalization and the numeric one-step test.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{apply_operator, sample_exp_poly, valid_interior, Window};
use crate::error::{Error, Result};
use crate::lattice::{exponent_row, q_eval, v_sets, CosetSet, Parametrization, MAX_LEVEL};
use crate::scheme::SchemeSpec;
use crate::space::ExpPolySpace;

pub const DEFAULT_TOL: f64 = 1e-9;

const NON_SINGULARITY: &str = "non-singularity of the scheme is assumed, not verified";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Generation,
    Reproduction,
}

/// One evaluated condition `lhs = rhs` at level `k`, pair `(γ, λ)` and `ε ∈ Ξ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionRecord {
    pub k: usize,
    pub gamma: Vec<u32>,
    pub lambda: Vec<Complex64>,
    pub eps: Vec<Complex64>,
    pub eps_is_one: bool,
    pub v: Vec<Complex64>,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
}

impl ConditionRecord {
    pub fn passed(&self, tol: f64) -> bool {
        self.residual <= tol
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub kind: CheckKind,
    pub scheme: String,
    pub tau: Option<Vec<f64>>,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub max_residual: f64,
    pub assumptions: Vec<String>,
    pub records: Vec<ConditionRecord>,
}

impl ConditionReport {
    fn build(
        kind: CheckKind,
        scheme: &SchemeSpec,
        tau: Option<&Parametrization>,
        tol: f64,
        records: Vec<ConditionRecord>,
    ) -> Self {
        let max_residual = records.iter().map(|r| r.residual).fold(0.0, f64::max);
        // NaN residuals fail
        let ok = records.iter().all(|r| r.residual <= tol);
        Self {
            kind,
            scheme: scheme.name.clone(),
            tau: tau.map(|t| t.as_slice().to_vec()),
            tolerance: tol,
            verdict: Verdict::from_bool(ok),
            max_residual,
            assumptions: vec![NON_SINGULARITY.to_string()],
            records,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionRecord> {
        self.records.iter().filter(move |r| {
            !matches!(
                r.residual.partial_cmp(&self.tolerance),
                Some(Ordering::Less | Ordering::Equal)
            )
        })
    }

    /// Records for one `(γ, λ)` and choice of `ε = 1` or `ε ≠ 1`.
    pub fn select<'a>(
        &'a self,
        gamma: &'a [u32],
        lambda: &'a [Complex64],
        eps_is_one: bool,
    ) -> impl Iterator<Item = &'a ConditionRecord> + 'a {
        self.records
            .iter()
            .filter(move |r| r.gamma == gamma && r.lambda == lambda && r.eps_is_one == eps_is_one)
    }
}

/// Absolute residual, relative once `|rhs| > 1`.
pub fn residual(lhs: Complex64, rhs: Complex64) -> f64 {
    let d = (lhs - rhs).norm();
    let scale = rhs.norm();
    if scale > 1.0 {
        d / scale
    } else {
        d
    }
}

fn check_range(k_range: &std::ops::RangeInclusive<usize>) -> Result<()> {
    let (start, end) = (*k_range.start(), *k_range.end());
    if start > end {
        return Err(Error::InvalidRange { start, end });
    }
    if end > MAX_LEVEL {
        return Err(Error::LevelTooLarge(end));
    }
    Ok(())
}

fn check_space(scheme: &SchemeSpec, space: &ExpPolySpace) -> Result<()> {
    if space.dim() != scheme.dim() {
        return Err(Error::DimensionMismatch {
            expected: scheme.dim(),
            found: space.dim(),
        });
    }
    Ok(())
}

/// Evaluates the per-level records in parallel; output keeps `(k, λ, γ, ε)` order.
fn per_level<F>(k_range: std::ops::RangeInclusive<usize>, f: F) -> Result<Vec<ConditionRecord>>
where
    F: Fn(usize) -> Result<Vec<ConditionRecord>> + Sync,
{
    let levels: Vec<usize> = k_range.collect();
    let chunks: Vec<Vec<ConditionRecord>> =
        levels.par_iter().map(|&k| f(k)).collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Zero conditions `D^γ a^{[k]}(v) = 0` for `v ∈ V'_k`, evaluated in the
/// weighted form `Σ a_α q_γ(α) v^α`. Since the space is downward closed the two
/// forms vanish together.
pub fn check_generation(
    scheme: &SchemeSpec,
    space: &ExpPolySpace,
    k_range: std::ops::RangeInclusive<usize>,
    tol: f64,
) -> Result<ConditionReport> {
    check_range(&k_range)?;
    check_space(scheme, space)?;
    let m = &scheme.dilation;
    let cosets = m.coset_set();
    let lambdas = space.lambdas();
    let records = per_level(k_range, |k| {
        let a = scheme.symbol_at(k)?;
        let (_, nontrivial) = v_sets(m, &cosets.dual, &lambdas, k)?;
        let mut out = Vec::new();
        for pair in space.pairs() {
            let li = lambdas
                .iter()
                .position(|l| *l == pair.lambda)
                .expect("lambda listed");
            for p in nontrivial.iter().filter(|p| p.lambda_index == li) {
                let lhs = a.weighted_derivative(&pair.gamma, &p.v)?;
                let rhs = Complex64::new(0.0, 0.0);
                out.push(ConditionRecord {
                    k,
                    gamma: pair.gamma.clone(),
                    lambda: pair.lambda.clone(),
                    eps: cosets.dual[p.eps_index].value.clone(),
                    eps_is_one: false,
                    v: p.v.clone(),
                    lhs,
                    rhs,
                    residual: residual(lhs, rhs),
                });
            }
        }
        Ok(out)
    })?;
    Ok(ConditionReport::build(
        CheckKind::Generation,
        scheme,
        None,
        tol,
        records,
    ))
}

/// `v^γ D^γ a^{[k]}(v) = m v^{Mτ-τ} q_γ(Mτ-τ)` at `ε = 1` and `= 0` otherwise,
/// for every `v ∈ V_k`.
pub fn check_reproduction(
    scheme: &SchemeSpec,
    space: &ExpPolySpace,
    tau: &Parametrization,
    k_range: std::ops::RangeInclusive<usize>,
    tol: f64,
) -> Result<ConditionReport> {
    check_range(&k_range)?;
    check_space(scheme, space)?;
    let m = &scheme.dilation;
    let c = tau.shift_vector(m)?;
    let c_complex: Vec<Complex64> = c.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let cosets = m.coset_set();
    let lambdas = space.lambdas();
    let mf = m.m() as f64;
    let records = per_level(k_range, |k| {
        let a = scheme.symbol_at(k)?;
        let (all, _) = v_sets(m, &cosets.dual, &lambdas, k)?;
        let mut out = Vec::new();
        for pair in space.pairs() {
            let li = lambdas
                .iter()
                .position(|l| *l == pair.lambda)
                .expect("lambda listed");
            for p in all.iter().filter(|p| p.lambda_index == li) {
                let eps = &cosets.dual[p.eps_index];
                let lhs = a.weighted_derivative(&pair.gamma, &p.v)?;
                let rhs = if eps.is_one() {
                    // v^c = exp(-μ·c) at ε = 1
                    let mu_c: Complex64 = p.mu.iter().zip(&c).map(|(mu, ci)| mu * ci).sum();
                    (-mu_c).exp() * mf * q_eval(&pair.gamma, &c_complex)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                out.push(ConditionRecord {
                    k,
                    gamma: pair.gamma.clone(),
                    lambda: pair.lambda.clone(),
                    eps: eps.value.clone(),
                    eps_is_one: eps.is_one(),
                    v: p.v.clone(),
                    lhs,
                    rhs,
                    residual: residual(lhs, rhs),
                });
            }
        }
        Ok(out)
    })?;
    Ok(ConditionReport::build(
        CheckKind::Reproduction,
        scheme,
        Some(tau),
        tol,
        records,
    ))
}

/// Solves for `τ` from probe levels `k_probe` and `k_probe + 1`.
///
/// For each `λ` whose first order pairs `(e_ℓ, λ)` are in the space the
/// ratios `v^{e_ℓ} D^{e_ℓ} a(v) / a(v)` at `ε = 1` give `(Mτ-τ)_ℓ` directly.
/// If those rows leave `Mτ-τ` underdetermined, every `(0, λ)` with `λ ≠ 0`
/// adds the rows `μ·(Mτ-τ) = -Log(a(v)/m)`. The stacked real system is solved
/// by least squares, each row must agree within `tol`, and the result must
/// pass [`check_reproduction`] at both probe levels.
pub fn solve_tau(
    scheme: &SchemeSpec,
    space: &ExpPolySpace,
    k_probe: usize,
    tol: f64,
) -> Result<Parametrization> {
    check_space(scheme, space)?;
    if k_probe + 1 > MAX_LEVEL {
        return Err(Error::LevelTooLarge(k_probe + 1));
    }
    let m = &scheme.dilation;
    let s = m.dim();
    let mf = m.m() as f64;
    let lambdas = space.lambdas();
    let one = vec![Complex64::new(1.0, 0.0); s];

    let mut ratio_rows: Vec<(Vec<f64>, f64, String)> = Vec::new();
    let mut log_rows: Vec<(Vec<f64>, f64, String)> = Vec::new();
    let mut log_guard: Option<Error> = None;

    for k in [k_probe, k_probe + 1] {
        let a = scheme.symbol_at(k)?;
        for lambda in &lambdas {
            let mu = exponent_row(m, lambda, k)?;
            let v: Vec<Complex64> = mu.iter().map(|x| (-x).exp()).collect();
            let av = a.eval(&v)?;
            let is_zero = lambda.iter().all(|l| l.norm() == 0.0);
            let first_order: Vec<usize> = (0..s)
                .filter(|&l| {
                    let mut e = vec![0u32; s];
                    e[l] = 1;
                    space.contains(&e, lambda)
                })
                .collect();
            if is_zero && !first_order.is_empty() {
                let at_one = a.eval(&one)?;
                if (at_one - mf).norm() > tol {
                    return Err(Error::SymbolAtOne {
                        value: at_one.re,
                        m: m.m(),
                    });
                }
            }
            if !first_order.is_empty() && av.norm() == 0.0 {
                return Err(Error::VanishingSymbol { k });
            }
            for &l in &first_order {
                let mut e = vec![0u32; s];
                e[l] = 1;
                let ratio = a.weighted_derivative(&e, &v)? / av;
                if ratio.im.abs() > tol {
                    return Err(Error::ComplexTau(ratio.im));
                }
                let mut row = vec![0.0; s];
                row[l] = 1.0;
                ratio_rows.push((
                    row,
                    ratio.re,
                    format!("k={k} lambda={lambda:?} derivative {l}"),
                ));
            }
            if !is_zero && space.contains(&vec![0; s], lambda) {
                let norm = mu.iter().map(|x| x.norm()).fold(0.0, f64::max);
                if norm >= std::f64::consts::PI {
                    log_guard.get_or_insert(Error::BranchAmbiguity { k, norm });
                    continue;
                }
                if av.norm() == 0.0 {
                    return Err(Error::VanishingSymbol { k });
                }
                let rhs = -(av / mf).ln();
                let re: Vec<f64> = mu.iter().map(|x| x.re).collect();
                let im: Vec<f64> = mu.iter().map(|x| x.im).collect();
                if re.iter().any(|x| *x != 0.0) {
                    log_rows.push((re, rhs.re, format!("k={k} lambda={lambda:?} log modulus")));
                }
                if im.iter().any(|x| *x != 0.0) {
                    log_rows.push((im, rhs.im, format!("k={k} lambda={lambda:?} log phase")));
                } else if rhs.im.abs() > tol {
                    log_rows.push((
                        vec![0.0; s],
                        rhs.im,
                        format!("k={k} lambda={lambda:?} log phase"),
                    ));
                }
            }
        }
    }

    let mut rows = ratio_rows;
    if rank(&rows, s) < s {
        if let Some(e) = log_guard {
            if rank(
                &rows.iter().chain(&log_rows).cloned().collect::<Vec<_>>(),
                s,
            ) < s
            {
                return Err(e);
            }
        }
        rows.extend(log_rows);
    }
    if rank(&rows, s) < s {
        return Err(Error::Underdetermined(format!(
            "{} usable condition row(s) constrain fewer than {s} directions; add first order pairs with lambda = 0 or pairs (0, lambda) with lambda != 0",
            rows.len()
        )));
    }

    let a_mat = DMatrix::from_fn(rows.len(), s, |i, j| rows[i].0[j]);
    let b = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    let c = a_mat
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::NoAdmissibleTau(e.to_string()))?;
    let fitted = &a_mat * &c;
    for (i, row) in rows.iter().enumerate() {
        let dev = (fitted[i] - row.1).abs();
        if dev > tol * row.1.abs().max(1.0) {
            return Err(Error::NoAdmissibleTau(format!(
                "condition {} is off by {dev:e} at the least squares solution",
                row.2
            )));
        }
    }

    // τ = (M - I)^{-1} c
    let m_minus_i = DMatrix::from_fn(s, s, |i, j| (m.entry(i, j) - i64::from(i == j)) as f64);
    let tau_vec = m_minus_i
        .lu()
        .solve(&c)
        .ok_or_else(|| Error::NoAdmissibleTau("M - I is singular".into()))?;
    let tau = Parametrization::new(tau_vec.iter().copied().collect());

    let report = check_reproduction(scheme, space, &tau, k_probe..=k_probe + 1, tol)?;
    if let Some(bad) = report.failures().next() {
        return Err(Error::NoAdmissibleTau(format!(
            "tau = {:?} leaves residual {:e} at k={} gamma={:?} lambda={:?}",
            tau.as_slice(),
            bad.residual,
            bad.k,
            bad.gamma,
            bad.lambda
        )));
    }
    Ok(tau)
}

fn rank(rows: &[(Vec<f64>, f64, String)], s: usize) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let a = DMatrix::from_fn(rows.len(), s, |i, j| rows[i].0[j]);
    a.rank(1e-10)
}

/// `K^{[k]} = m v^{Mτ-τ} / a^{[k]}(v)` with `v = e^{-λ·M^{-(k+1)}}`.
pub fn normalization_factor(
    scheme: &SchemeSpec,
    lambda: &[Complex64],
    tau: &Parametrization,
    k: usize,
) -> Result<Complex64> {
    let m = &scheme.dilation;
    let c = tau.shift_vector(m)?;
    let mu = exponent_row(m, lambda, k)?;
    let v: Vec<Complex64> = mu.iter().map(|x| (-x).exp()).collect();
    let av = scheme.symbol_at(k)?.eval(&v)?;
    if av.norm() == 0.0 {
        return Err(Error::VanishingSymbol { k });
    }
    let mu_c: Complex64 = mu.iter().zip(&c).map(|(x, ci)| x * ci).sum();
    Ok((-mu_c).exp() * m.m() as f64 / av)
}

/// Rescales every level so the `γ = 0`, `ε = 1` condition holds at `lambda`.
pub fn normalize(
    scheme: &SchemeSpec,
    lambda: &[Complex64],
    tau: &Parametrization,
) -> Result<SchemeSpec> {
    if lambda.len() != scheme.dim() {
        return Err(Error::DimensionMismatch {
            expected: scheme.dim(),
            found: lambda.len(),
        });
    }
    tau.shift_vector(&scheme.dilation)?;
    let base = scheme.clone();
    let lambda = lambda.to_vec();
    let t = tau.clone();
    let out = scheme
        .map_levels(format!("{} normalized", scheme.name), move |k, a| {
            Ok(a.scale(normalization_factor(&base, &lambda, &t, k)?))
        })
        .with_tau(tau.clone());
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepwiseRecord {
    pub k: usize,
    pub gamma: Vec<u32>,
    pub lambda: Vec<Complex64>,
    pub interior_points: usize,
    pub max_abs_error: f64,
    /// `max |error| / max(1, |expected|)`, the quantity the verdict uses.
    pub max_scaled_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepwiseReport {
    pub scheme: String,
    pub tau: Vec<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub max_abs_error: f64,
    pub max_scaled_error: f64,
    pub records: Vec<StepwiseRecord>,
}

impl StepwiseReport {
    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }
}

/// `[-R, R]^s` with `R` three beyond the largest mask exponent over the levels.
pub fn default_window(
    scheme: &SchemeSpec,
    k_range: std::ops::RangeInclusive<usize>,
) -> Result<Window> {
    let mut r = 0;
    for k in k_range {
        if let Some((lo, hi)) = scheme.symbol_at(k)?.support_box() {
            r = lo.iter().chain(&hi).fold(r, |acc, x| acc.max(x.abs()));
        }
    }
    Ok(Window::cube(scheme.dim(), r + 3))
}

/// Samples every basis function at level `k`, applies `a^{[k]}` once and
/// compares with the level `k+1` samples on the valid interior.
pub fn stepwise_test(
    scheme: &SchemeSpec,
    space: &ExpPolySpace,
    tau: &Parametrization,
    k_range: std::ops::RangeInclusive<usize>,
    window: Option<&Window>,
    tol: f64,
) -> Result<StepwiseReport> {
    check_range(&k_range)?;
    check_space(scheme, space)?;
    let m = &scheme.dilation;
    tau.shift_vector(m)?;
    let window = match window {
        Some(w) => w.clone(),
        None => default_window(scheme, k_range.clone())?,
    };
    let levels: Vec<usize> = k_range.collect();
    let chunks: Vec<Vec<StepwiseRecord>> = levels
        .par_iter()
        .map(|&k| {
            let a = scheme.symbol_at(k)?;
            let interior = valid_interior(&a, m, &window);
            if interior.is_empty() {
                return Err(Error::EmptyInterior);
            }
            space
                .pairs()
                .iter()
                .map(|pair| {
                    let f = sample_exp_poly(pair, m, tau, k, &window)?;
                    let g = apply_operator(&a, m, &f)?;
                    let exact = Window::new(
                        (0..m.dim())
                            .map(|i| interior.iter().map(|p| p[i]).min().unwrap())
                            .collect(),
                        (0..m.dim())
                            .map(|i| interior.iter().map(|p| p[i]).max().unwrap())
                            .collect(),
                    );
                    let want = sample_exp_poly(pair, m, tau, k + 1, &exact)?;
                    let (mut abs_err, mut scaled) = (0.0f64, 0.0f64);
                    for alpha in &interior {
                        let got = g.get(alpha).unwrap_or(Complex64::new(0.0, 0.0));
                        let w = want.get(alpha).expect("interior inside its bounding box");
                        let d = (got - w).norm();
                        abs_err = abs_err.max(d);
                        scaled = scaled.max(d / w.norm().max(1.0));
                    }
                    Ok(StepwiseRecord {
                        k,
                        gamma: pair.gamma.clone(),
                        lambda: pair.lambda.clone(),
                        interior_points: interior.len(),
                        max_abs_error: abs_err,
                        max_scaled_error: scaled,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let records: Vec<StepwiseRecord> = chunks.into_iter().flatten().collect();
    let max_abs_error = records.iter().map(|r| r.max_abs_error).fold(0.0, f64::max);
    let max_scaled_error = records
        .iter()
        .map(|r| r.max_scaled_error)
        .fold(0.0, f64::max);
    let ok = records.iter().all(|r| r.max_scaled_error <= tol);
    Ok(StepwiseReport {
        scheme: scheme.name.clone(),
        tau: tau.as_slice().to_vec(),
        tolerance: tol,
        verdict: Verdict::from_bool(ok),
        max_abs_error,
        max_scaled_error,
        records,
    })
}

/// `Σ_{ε̃ ∈ E} ε^{ε̃}` for every `ε ∈ Ξ`; `m` at the all-ones point and `0` elsewhere.
pub fn dual_sums(cosets: &CosetSet) -> Vec<Complex64> {
    cosets
        .dual
        .iter()
        .map(|eps| {
            cosets
                .reps
                .iter()
                .map(|e| {
                    eps.value
                        .iter()
                        .zip(e)
                        .fold(Complex64::new(1.0, 0.0), |acc, (x, &p)| {
                            acc * x.powi(p as i32)
                        })
                })
                .sum::<Complex64>()
        })
        .collect()
}
