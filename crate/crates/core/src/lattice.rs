//! Integer lattice machinery for a dilation matrix `M`.
//!
//! Coset transversals of `Z^s / M Z^s` are computed from an upper triangular
//! Hermite normal form of `M` over exact integers, so every representative
//! set this module hands out is deterministic. The dual points `Ξ` are
//! `exp(2πi M^{-T} ξ)` over a transversal `ξ` of `Z^s / M^T Z^s`, with the
//! rational phases kept exactly and quarter turns snapped to `±1, ±i`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer vector indexing the lattice `Z^s`.
pub type IVec = Vec<i64>;

/// Largest refinement level for which `M^{-(k+1)}` is formed.
pub const MAX_LEVEL: usize = 60;

const EIGEN_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DilationMatrix {
    dim: usize,
    entries: Vec<i64>,
    det: i64,
    /// Columns of the upper triangular Hermite basis of `M Z^s`, column major.
    hermite: Vec<i64>,
    adjugate: Vec<i64>,
}

impl DilationMatrix {
    /// Builds a dilation matrix from row-major integer entries.
    pub fn new(dim: usize, entries: Vec<i64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::MalformedMatrix {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        let det = determinant(dim, &entries);
        if det == 0 {
            return Err(Error::SingularMatrix);
        }
        let det = i64::try_from(det)
            .map_err(|_| Error::InvalidParameter("determinant overflows i64".into()))?;

        let dense =
            nalgebra::DMatrix::from_row_iterator(dim, dim, entries.iter().map(|&e| e as f64));
        for ev in dense.complex_eigenvalues().iter() {
            let modulus = ev.norm();
            if modulus <= 1.0 + EIGEN_TOL {
                return Err(Error::NotExpanding { modulus });
            }
        }

        let hermite = hermite_columns(dim, &entries);
        let adjugate = adjugate(dim, &entries);
        Ok(Self {
            dim,
            entries,
            det,
            hermite,
            adjugate,
        })
    }

    /// `n I` in dimension `dim`.
    pub fn scalar(n: i64, dim: usize) -> Result<Self> {
        let mut entries = vec![0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = n;
        }
        Self::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `m = |det M|`, the number of cosets.
    pub fn m(&self) -> usize {
        self.det.unsigned_abs() as usize
    }

    pub fn det(&self) -> i64 {
        self.det
    }

    pub fn entry(&self, row: usize, col: usize) -> i64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut t = vec![0; d * d];
        for i in 0..d {
            for j in 0..d {
                t[j * d + i] = self.entries[i * d + j];
            }
        }
        // Transpose of a valid dilation matrix is valid.
        Self::new(d, t).expect("transpose of a dilation matrix")
    }

    /// `M v`.
    pub fn apply(&self, v: &[i64]) -> IVec {
        let d = self.dim;
        (0..d)
            .map(|i| (0..d).map(|j| self.entries[i * d + j] * v[j]).sum())
            .collect()
    }

    /// `M^{-1} v` if it is an integer vector.
    pub fn solve_exact(&self, v: &[i64]) -> Option<IVec> {
        let d = self.dim;
        let mut out = Vec::with_capacity(d);
        for i in 0..d {
            let num: i128 = (0..d)
                .map(|j| self.adjugate[i * d + j] as i128 * v[j] as i128)
                .sum();
            if num % self.det as i128 != 0 {
                return None;
            }
            out.push((num / self.det as i128) as i64);
        }
        Some(out)
    }

    /// True if `v ∈ M Z^s`.
    pub fn in_lattice(&self, v: &[i64]) -> bool {
        self.solve_exact(v).is_some()
    }

    /// Canonical representative of `v + M Z^s` inside the Hermite digit box.
    pub fn reduce(&self, v: &[i64]) -> IVec {
        let d = self.dim;
        let mut r = v.to_vec();
        for i in (0..d).rev() {
            let col = &self.hermite[i * d..(i + 1) * d];
            let q = r[i].div_euclid(col[i]);
            if q != 0 {
                for (x, c) in r.iter_mut().zip(col) {
                    *x -= q * c;
                }
            }
        }
        r
    }

    /// Diagonal of the Hermite basis; the digit box is `∏ [0, d_i)`.
    pub fn digit_box(&self) -> Vec<i64> {
        (0..self.dim)
            .map(|i| self.hermite[i * self.dim + i])
            .collect()
    }

    pub fn inverse_f64(&self) -> Vec<f64> {
        let det = self.det as f64;
        self.adjugate.iter().map(|&a| a as f64 / det).collect()
    }

    /// `M^{-p}` in double precision, by powering `M^{-1}`. Row major.
    pub fn inverse_power(&self, p: usize) -> Result<Vec<f64>> {
        if p > MAX_LEVEL + 1 {
            return Err(Error::LevelTooLarge(p));
        }
        let d = self.dim;
        let inv = self.inverse_f64();
        let mut acc = identity(d);
        for _ in 0..p {
            acc = mat_mul(d, &acc, &inv);
        }
        Ok(acc)
    }

    pub fn coset_set(&self) -> CosetSet {
        CosetSet {
            reps: coset_reps(self),
            dual: dual_coset_points(self),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualPoint {
    /// Representative `ξ` of `Z^s / M^T Z^s`.
    pub xi: IVec,
    /// `M^{-T} ξ = phase / m (mod 1)`, numerators in `[0, m)`.
    pub phase: Vec<i64>,
    pub value: Vec<Complex64>,
}

impl DualPoint {
    pub fn is_one(&self) -> bool {
        self.phase.iter().all(|&p| p == 0)
    }

    /// `ε^β`, evaluated from the exact phase.
    pub fn pow(&self, beta: &[i64], m: usize) -> Complex64 {
        let m = m as i64;
        let num = self
            .phase
            .iter()
            .zip(beta)
            .map(|(p, b)| (p * b.rem_euclid(m)) % m)
            .sum::<i64>()
            .rem_euclid(m);
        unit_root(num, m)
    }
}

/// The transversal `E` together with the dual points `Ξ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CosetSet {
    pub reps: Vec<IVec>,
    pub dual: Vec<DualPoint>,
}

/// Shift parameter `τ` of the parametrization `t_α^{[k]} = M^{-k}(α + τ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Parametrization {
    tau: Vec<f64>,
}

impl Parametrization {
    pub fn new(tau: Vec<f64>) -> Self {
        Self { tau }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            tau: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.tau.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.tau
    }

    /// `M τ - τ`.
    pub fn shift_vector(&self, m: &DilationMatrix) -> Result<Vec<f64>> {
        let d = m.dim();
        if self.tau.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: self.tau.len(),
            });
        }
        Ok((0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let e = m.entry(i, j) - i64::from(i == j);
                        e as f64 * self.tau[j]
                    })
                    .sum()
            })
            .collect())
    }
}

/// Representatives of `Z^s / M Z^s`, the Hermite digit box in lexicographic order.
pub fn coset_reps(m: &DilationMatrix) -> Vec<IVec> {
    let digits = m.digit_box();
    let mut out = vec![vec![]];
    for &d in &digits {
        out = out
            .into_iter()
            .flat_map(|prefix: IVec| {
                (0..d).map(move |x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }
    out.sort();
    out
}

/// Whether `reps` is a complete set of representatives of `Z^s / M Z^s`.
pub fn is_transversal(m: &DilationMatrix, reps: &[IVec]) -> bool {
    if reps.len() != m.m() || reps.iter().any(|r| r.len() != m.dim()) {
        return false;
    }
    for (i, a) in reps.iter().enumerate() {
        for b in &reps[i + 1..] {
            let diff: IVec = a.iter().zip(b).map(|(x, y)| x - y).collect();
            if m.in_lattice(&diff) {
                return false;
            }
        }
    }
    true
}

/// Whether two representative sets cover the same cosets.
pub fn same_cosets(m: &DilationMatrix, a: &[IVec], b: &[IVec]) -> bool {
    if !is_transversal(m, a) || !is_transversal(m, b) {
        return false;
    }
    let mut ra: Vec<IVec> = a.iter().map(|v| m.reduce(v)).collect();
    let mut rb: Vec<IVec> = b.iter().map(|v| m.reduce(v)).collect();
    ra.sort();
    rb.sort();
    ra == rb
}

/// `Ξ = { exp(2πi M^{-T} ξ) }`, the all-ones point first, then by `ξ`.
pub fn dual_coset_points(m: &DilationMatrix) -> Vec<DualPoint> {
    let mt = m.transpose();
    let det = m.det() as i128;
    let modulus = m.m() as i64;
    let d = m.dim();
    coset_reps(&mt)
        .into_iter()
        .map(|xi| {
            // M^{-T} ξ = adj(M^T) ξ / det
            let phase: Vec<i64> = (0..d)
                .map(|i| {
                    let num: i128 = (0..d)
                        .map(|j| mt.adjugate[i * d + j] as i128 * xi[j] as i128)
                        .sum();
                    let num = if det < 0 { -num } else { num };
                    num.rem_euclid(modulus as i128) as i64
                })
                .collect();
            let value = phase.iter().map(|&p| unit_root(p, modulus)).collect();
            DualPoint { xi, phase, value }
        })
        .collect()
}

/// `exp(2πi num/den)` with exact values at quarter turns.
pub fn unit_root(num: i64, den: i64) -> Complex64 {
    let num = num.rem_euclid(den);
    if num == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if 2 * num == den {
        return Complex64::new(-1.0, 0.0);
    }
    if 4 * num == den {
        return Complex64::new(0.0, 1.0);
    }
    if 4 * num == 3 * den {
        return Complex64::new(0.0, -1.0);
    }
    Complex64::from_polar(1.0, 2.0 * PI * num as f64 / den as f64)
}

/// Falling factorial `q_γ(z) = ∏_ℓ ∏_{j<γ_ℓ} (z_ℓ - j)`.
pub fn q_eval(gamma: &[u32], z: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for (&g, &zl) in gamma.iter().zip(z) {
        for j in 0..g {
            acc *= zl - j as f64;
        }
    }
    acc
}

pub fn q_eval_real(gamma: &[u32], z: &[f64]) -> f64 {
    let mut acc = 1.0;
    for (&g, &zl) in gamma.iter().zip(z) {
        for j in 0..g {
            acc *= zl - j as f64;
        }
    }
    acc
}

/// `q_γ(α)` at an integer point; exact while the product fits in 53 bits.
pub fn q_eval_int(gamma: &[u32], alpha: &[i64]) -> f64 {
    let mut acc = 1.0;
    for (&g, &a) in gamma.iter().zip(alpha) {
        for j in 0..g as i64 {
            let f = a - j;
            if f == 0 {
                return 0.0;
            }
            acc *= f as f64;
        }
    }
    acc
}

/// `μ = λᵀ M^{-(k+1)}`, the exponent vector of the points in `V_k`.
pub fn exponent_row(m: &DilationMatrix, lambda: &[Complex64], k: usize) -> Result<Vec<Complex64>> {
    let d = m.dim();
    if lambda.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: lambda.len(),
        });
    }
    if k > MAX_LEVEL {
        return Err(Error::LevelTooLarge(k));
    }
    let p = m.inverse_power(k + 1)?;
    Ok((0..d)
        .map(|j| (0..d).map(|i| lambda[i] * p[i * d + j]).sum())
        .collect())
}

/// One element of `V_k`: `v_j = ε_j exp(-μ_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VPoint {
    pub lambda_index: usize,
    pub eps_index: usize,
    pub v: Vec<Complex64>,
    pub mu: Vec<Complex64>,
}

/// `(V_k, V'_k)` for the given `Λ`; `V'_k` omits the all-ones dual point.
pub fn v_sets(
    m: &DilationMatrix,
    dual: &[DualPoint],
    lambdas: &[Vec<Complex64>],
    k: usize,
) -> Result<(Vec<VPoint>, Vec<VPoint>)> {
    let mut all = Vec::new();
    let mut nontrivial = Vec::new();
    for (li, lambda) in lambdas.iter().enumerate() {
        let mu = exponent_row(m, lambda, k)?;
        let base: Vec<Complex64> = mu.iter().map(|x| (-x).exp()).collect();
        for (ei, eps) in dual.iter().enumerate() {
            let v: Vec<Complex64> = eps.value.iter().zip(&base).map(|(e, b)| e * b).collect();
            let p = VPoint {
                lambda_index: li,
                eps_index: ei,
                v,
                mu: mu.clone(),
            };
            if !eps.is_one() {
                nontrivial.push(p.clone());
            }
            all.push(p);
        }
    }
    Ok((all, nontrivial))
}

/// `t_α^{[k]} = M^{-k}(α + τ)` for each `α`.
pub fn param_points(
    m: &DilationMatrix,
    tau: &Parametrization,
    k: usize,
    alphas: &[IVec],
) -> Result<Vec<Vec<f64>>> {
    let d = m.dim();
    if tau.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: tau.dim(),
        });
    }
    let p = m.inverse_power(k)?;
    alphas
        .iter()
        .map(|a| {
            if a.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: a.len(),
                });
            }
            let shifted: Vec<f64> = a
                .iter()
                .zip(tau.as_slice())
                .map(|(&x, t)| x as f64 + t)
                .collect();
            Ok((0..d)
                .map(|i| (0..d).map(|j| p[i * d + j] * shifted[j]).sum())
                .collect())
        })
        .collect()
}

fn identity(d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = 1.0;
    }
    m
}

fn mat_mul(d: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            for j in 0..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    out
}

/// Fraction-free Bareiss elimination.
fn determinant(d: usize, entries: &[i64]) -> i128 {
    if d == 0 {
        return 1;
    }
    let mut a: Vec<i128> = entries.iter().map(|&x| x as i128).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..d {
        if a[k * d + k] == 0 {
            let Some(p) = (k + 1..d).find(|&r| a[r * d + k] != 0) else {
                return 0;
            };
            for j in 0..d {
                a.swap(k * d + j, p * d + j);
            }
            sign = -sign;
        }
        for i in k + 1..d {
            for j in k + 1..d {
                a[i * d + j] = (a[i * d + j] * a[k * d + k] - a[i * d + k] * a[k * d + j]) / prev;
            }
        }
        prev = a[k * d + k];
    }
    sign * a[(d - 1) * d + (d - 1)]
}

fn adjugate(d: usize, entries: &[i64]) -> Vec<i64> {
    if d == 1 {
        return vec![1];
    }
    let mut adj = vec![0i64; d * d];
    for i in 0..d {
        for j in 0..d {
            // adj[i][j] = (-1)^{i+j} det(minor without row j, col i)
            let minor: Vec<i64> = (0..d)
                .filter(|&r| r != j)
                .flat_map(|r| {
                    (0..d)
                        .filter(move |&c| c != i)
                        .map(move |c| entries[r * d + c])
                })
                .collect();
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            adj[i * d + j] = sign * determinant(d - 1, &minor) as i64;
        }
    }
    adj
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Upper triangular column Hermite basis `H = M U`, returned column major.
fn hermite_columns(d: usize, entries: &[i64]) -> Vec<i64> {
    // cols[c][r]
    let mut cols: Vec<Vec<i128>> = (0..d)
        .map(|c| (0..d).map(|r| entries[r * d + c] as i128).collect())
        .collect();
    for i in (0..d).rev() {
        for j in 0..i {
            if cols[j][i] == 0 {
                continue;
            }
            if cols[i][i] == 0 {
                cols.swap(i, j);
                continue;
            }
            let a = cols[i][i];
            let b = cols[j][i];
            let (g, x, y) = ext_gcd(a, b);
            let (ag, bg) = (a / g, b / g);
            let ci = cols[i].clone();
            let cj = cols[j].clone();
            for r in 0..d {
                cols[i][r] = x * ci[r] + y * cj[r];
                cols[j][r] = -bg * ci[r] + ag * cj[r];
            }
        }
        if cols[i][i] < 0 {
            for v in cols[i].iter_mut() {
                *v = -*v;
            }
        }
    }
    cols.into_iter().flatten().map(|x| x as i64).collect()
}
