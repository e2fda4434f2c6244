//! Parametric scheme constructors.
//!
//! `r_k = e^{λ·M^{-(k+1)}}` throughout, taken componentwise for `s > 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::checker::normalize;
use crate::error::{Error, Result};
use crate::lattice::{exponent_row, DilationMatrix, IVec, Parametrization};
use crate::scheme::{CatalogInstance, SchemeSpec};
use crate::space::{ExpPolyPair, ExpPolySpace};
use crate::symbol::LaurentSymbol;

/// Agreement required between the two dual 4-point constructions.
pub const CONSTRUCTION_TOL: f64 = 1e-12;

const DENOMINATOR_TOL: f64 = 1e-10;

fn cx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `Σ_{ε ∈ digits} e^{μ·ε} z^ε`.
fn geometric(mu: &[Complex64], digits: &[IVec]) -> LaurentSymbol {
    LaurentSymbol::from_terms(
        mu.len(),
        digits.iter().map(|e| {
            let p: Complex64 = mu.iter().zip(e).map(|(m, &x)| m * x as f64).sum();
            (e.clone(), p.exp())
        }),
    )
    .expect("digit dimension")
}

fn univariate_digits(m: usize) -> Vec<IVec> {
    (0..m as i64).map(|e| vec![e]).collect()
}

fn dilation_1d(m: usize) -> Result<DilationMatrix> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "arity must be at least 2, got {m}"
        )));
    }
    DilationMatrix::scalar(m as i64, 1)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Normalization {
    None,
    /// `K^{[k]} = m^{1-n} r_k^{-(m-1)τ}`.
    ForTau(f64),
}

/// `K^{[k]} (Σ_{ε<m} r_k^ε z^ε)^n`.
pub fn exp_bspline(
    m: usize,
    lambda: Complex64,
    n_fold: u32,
    normalization: Normalization,
) -> Result<SchemeSpec> {
    if n_fold == 0 {
        return Err(Error::InvalidParameter("n_fold must be at least 1".into()));
    }
    let dil = dilation_1d(m)?;
    let d = dil.clone();
    let mut s = SchemeSpec::family(format!("exp_bspline(m={m}, n={n_fold})"), dil, move |k| {
        let mu = exponent_row(&d, &[lambda], k)?;
        let base = geometric(&mu, &univariate_digits(m)).pow(n_fold);
        Ok(match normalization {
            Normalization::None => base,
            Normalization::ForTau(tau) => {
                let kf =
                    (m as f64).powi(1 - n_fold as i32) * (-mu[0] * (m as f64 - 1.0) * tau).exp();
                base.scale(kf)
            }
        })
    });
    s.tau = match normalization {
        Normalization::ForTau(t) => Some(Parametrization::new(vec![t])),
        Normalization::None if n_fold == 1 => Some(Parametrization::zero(1)),
        Normalization::None => None,
    };
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProductNormalization {
    None,
    /// Scale so the zeroth order condition at the first factor's `λ` holds for `τ`.
    Anchor {
        tau: f64,
    },
}

/// `K^{[k]} ∏_i (Σ_{ε<m} e^{λ_i m^{-(k+1)} ε} z^ε)^{n_i}`.
pub fn exp_product(
    m: usize,
    factors: &[(Complex64, u32)],
    normalization: ProductNormalization,
) -> Result<SchemeSpec> {
    if factors.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one factor is required".into(),
        ));
    }
    let dil = dilation_1d(m)?;
    let d = dil.clone();
    let fs = factors.to_vec();
    let base = SchemeSpec::family(
        format!("exp_product(m={m}, {} factors)", factors.len()),
        dil,
        move |k| {
            let mut acc = LaurentSymbol::constant(1, cx(1.0));
            for (lambda, n) in &fs {
                let mu = exponent_row(&d, &[*lambda], k)?;
                acc = acc.mul(&geometric(&mu, &univariate_digits(m)).pow(*n));
            }
            Ok(acc)
        },
    );
    match normalization {
        ProductNormalization::None => Ok(base),
        ProductNormalization::Anchor { tau } => {
            let mut s = normalize(&base, &[factors[0].0], &Parametrization::new(vec![tau]))?;
            s.name = base.name;
            Ok(s)
        }
    }
}

/// `Σ_{ε ∈ {0..n-1}^s} r_k^ε z^ε` with `M = nI`.
pub fn exp_box_spline(n_dil: usize, lambda: Vec<Complex64>) -> Result<SchemeSpec> {
    if n_dil < 2 {
        return Err(Error::InvalidParameter(format!(
            "dilation factor must be at least 2, got {n_dil}"
        )));
    }
    let dim = lambda.len();
    if dim == 0 {
        return Err(Error::InvalidParameter(
            "lambda must have at least one component".into(),
        ));
    }
    let dil = DilationMatrix::scalar(n_dil as i64, dim)?;
    let digits = crate::lattice::coset_reps(&dil);
    let d = dil.clone();
    Ok(SchemeSpec::family(
        format!("exp_box_spline(n={n_dil}, s={dim})"),
        dil,
        move |k| Ok(geometric(&exponent_row(&d, &lambda, k)?, &digits)),
    )
    .with_tau(Parametrization::zero(dim)))
}

/// `w^{[k]} = (e^{h/2} + e^{-h/2}) / 2` with `h = λ m^{-(k+1)}`.
pub fn dual4_w(m: usize, lambda: Complex64, k: usize) -> Result<Complex64> {
    let d = dilation_1d(m)?;
    let h = exponent_row(&d, &[lambda], k)?[0];
    Ok(((h / 2.0).exp() + (-h / 2.0).exp()) / 2.0)
}

fn guard(k: usize, factors: &[(&'static str, Complex64)]) -> Result<()> {
    for (name, v) in factors {
        if v.norm() < DENOMINATOR_TOL {
            return Err(Error::VanishingDenominator { k, factor: name });
        }
    }
    Ok(())
}

fn binary_guard(w: Complex64, k: usize) -> Result<Complex64> {
    guard(
        k,
        &[("w", w), ("2w^2-1", 2.0 * w * w - 1.0), ("w+1", w + 1.0)],
    )?;
    Ok(64.0 * w.powi(3) * (2.0 * w * w - 1.0) * (w + 1.0))
}

/// Binary mask from the coefficient formulas, taps on `z^{-4} .. z^3`.
pub fn dual4_binary_coefficients(lambda: Complex64, k: usize) -> Result<LaurentSymbol> {
    let w = dual4_w(2, lambda, k)?;
    let d = binary_guard(w, k)?;
    let w2 = w * w;
    let c0 = -(6.0 * w2 + 2.0 * w - 1.0) / d;
    let c1 = (10.0 * w2 + 2.0 * w - 3.0) / d + 0.75;
    let c2 = (-2.0 * w2 + 2.0 * w + 3.0) / d + 0.25;
    let c3 = -(2.0 * w2 + 2.0 * w + 1.0) / d;
    // c32 c01 c22 c11 c12 c21 c02 c31
    let taps = [c3, c0, c2, c1, c1, c2, c0, c3];
    LaurentSymbol::from_terms(
        1,
        taps.iter()
            .enumerate()
            .map(|(i, c)| (vec![i as i64 - 4], *c)),
    )
}

/// Binary mask from the factored symbol.
pub fn dual4_binary_factored(lambda: Complex64, k: usize) -> Result<LaurentSymbol> {
    let w = dual4_w(2, lambda, k)?;
    let d = binary_guard(w, k)?;
    let w2 = w * w;
    let poly = |cs: &[Complex64]| {
        LaurentSymbol::from_terms(1, cs.iter().enumerate().map(|(i, c)| (vec![i as i64], *c)))
            .expect("1d")
    };
    let a = 2.0 * w2 + 2.0 * w + 1.0;
    let p = poly(&[cx(1.0), cx(1.0)])
        .pow(3)
        .mul(&poly(&[cx(1.0), 4.0 * w2 - 2.0, cx(1.0)]))
        .mul(&poly(&[a, -(8.0 * w2 * w2 + 8.0 * w2 * w + 2.0), a]));
    Ok(p.shift(&[-4]).scale(-1.0 / d))
}

fn ternary_denominators(w: Complex64, k: usize) -> Result<(Complex64, Complex64, Complex64)> {
    guard(
        k,
        &[
            ("w", w),
            ("2w-1", 2.0 * w - 1.0),
            ("2w+1", 2.0 * w + 1.0),
            ("4w^2-3", 4.0 * w * w - 3.0),
            ("w+1", w + 1.0),
        ],
    )?;
    let w2 = w * w;
    let short = 8.0 * w * (2.0 * w - 1.0).powi(2) * (4.0 * w2 - 3.0) * (w + 1.0);
    let da = 24.0 * w * (4.0 * w2 - 1.0).powi(3) * (-4.0 * w2 * w - 4.0 * w2 + 3.0 * w + 3.0);
    let db =
        8.0 * w * (2.0 * w - 1.0).powi(3) * (2.0 * w + 1.0).powi(3) * (4.0 * w2 - 3.0) * (w + 1.0);
    Ok((short, da, db))
}

/// Ternary mask from the coefficient formulas, taps on `z^{-6} .. z^5`.
pub fn dual4_ternary_coefficients(lambda: Complex64, k: usize) -> Result<LaurentSymbol> {
    let w = dual4_w(3, lambda, k)?;
    let (short, da, db) = ternary_denominators(w, k)?;
    let w2 = w * w;
    let w3 = w2 * w;
    let w4 = w2 * w2;
    let c02 = -1.0 / short;
    let c12 = 1.0 / short + 0.5;
    let c22 = c12;
    let c32 = c02;
    let c03 = (16.0 * w4 + 16.0 * w3 + 3.0) / da;
    let c13 = -(16.0 * w4 - 16.0 * w2 - 4.0 * w - 1.0) / db + 1.0 / 6.0;
    let c23 = (48.0 * w4 + 16.0 * w3 - 32.0 * w2 - 8.0 * w + 1.0) / db + 5.0 / 6.0;
    let c33 = (80.0 * w4 + 32.0 * w3 - 48.0 * w2 - 12.0 * w + 3.0) / da;
    let (c31, c21, c11, c01) = (c03, c13, c23, c33);
    let taps = [c03, c02, c01, c13, c12, c11, c23, c22, c21, c33, c32, c31];
    LaurentSymbol::from_terms(
        1,
        taps.iter()
            .enumerate()
            .map(|(i, c)| (vec![i as i64 - 6], *c)),
    )
}

/// Ternary mask from the factored symbol.
pub fn dual4_ternary_factored(lambda: Complex64, k: usize) -> Result<LaurentSymbol> {
    let w = dual4_w(3, lambda, k)?;
    ternary_denominators(w, k)?;
    let w2 = w * w;
    let w3 = w2 * w;
    let w4 = w2 * w2;
    let kk = 1.0
        / (24.0
            * w
            * (2.0 * w - 1.0).powi(3)
            * (2.0 * w + 1.0).powi(3)
            * (4.0 * w2 - 3.0)
            * (w + 1.0));
    let poly = |cs: &[Complex64]| {
        LaurentSymbol::from_terms(1, cs.iter().enumerate().map(|(i, c)| (vec![i as i64], *c)))
            .expect("1d")
    };
    let a = 16.0 * w4 + 16.0 * w3 + 3.0;
    let mid = -64.0 * w3 * w3 - 64.0 * w4 * w + 32.0 * w4 + 32.0 * w3 - 12.0 * w2 - 12.0 * w - 6.0;
    let inner = 4.0 * w2 - 2.0;
    let p = poly(&[cx(1.0), cx(1.0), cx(1.0)])
        .pow(2)
        .mul(&poly(&[cx(1.0), cx(1.0)]))
        .mul(&poly(&[
            cx(1.0),
            inner,
            16.0 * w4 - 16.0 * w2 + 3.0,
            inner,
            cx(1.0),
        ]))
        .mul(&poly(&[a, mid, a]));
    Ok(p.shift(&[-6]).scale(-kk))
}

fn cross_checked(k: usize, a: LaurentSymbol, b: LaurentSymbol) -> Result<LaurentSymbol> {
    let scale = a.iter().map(|(_, c)| c.norm()).fold(1.0, f64::max);
    let deviation = a.max_abs_diff(&b);
    // NaN deviation must fail
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(deviation <= CONSTRUCTION_TOL * scale) {
        return Err(Error::ConstructionMismatch { k, deviation });
    }
    Ok(a)
}

/// Numerators of the binary limit mask over 128, taps on `z^{-4} .. z^3`.
pub const DUAL4_BINARY_LIMIT: [i64; 8] = [-5, -7, 35, 105, 105, 35, -7, -5];
/// Numerators of the ternary limit mask over 1296, taps on `z^{-6} .. z^5`.
pub const DUAL4_TERNARY_LIMIT: [i64; 12] =
    [-35, -81, -55, 231, 729, 1155, 1155, 729, 231, -55, -81, -35];

pub fn dual4_binary_limit() -> LaurentSymbol {
    LaurentSymbol::from_real_coeffs(-4, &DUAL4_BINARY_LIMIT.map(|n| n as f64 / 128.0))
}

pub fn dual4_ternary_limit() -> LaurentSymbol {
    LaurentSymbol::from_real_coeffs(-6, &DUAL4_TERNARY_LIMIT.map(|n| n as f64 / 1296.0))
}

/// Binary dual 4-point scheme reproducing `{1, x, e^{λx}, e^{-λx}}` with `τ = -1/2`.
pub fn dual4_binary(lambda: Complex64) -> Result<SchemeSpec> {
    // fail early on parameters that hit a denominator at level 0
    dual4_binary_coefficients(lambda, 0)?;
    Ok(
        SchemeSpec::family("dual4_binary", dilation_1d(2)?, move |k| {
            cross_checked(
                k,
                dual4_binary_coefficients(lambda, k)?,
                dual4_binary_factored(lambda, k)?,
            )
        })
        .with_tau(Parametrization::new(vec![-0.5])),
    )
}

/// Ternary dual 4-point scheme reproducing `{1, x, e^{λx}, e^{-λx}}` with `τ = -1/4`.
pub fn dual4_ternary(lambda: Complex64) -> Result<SchemeSpec> {
    dual4_ternary_coefficients(lambda, 0)?;
    Ok(
        SchemeSpec::family("dual4_ternary", dilation_1d(3)?, move |k| {
            cross_checked(
                k,
                dual4_ternary_coefficients(lambda, k)?,
                dual4_ternary_factored(lambda, k)?,
            )
        })
        .with_tau(Parametrization::new(vec![-0.25])),
    )
}

/// `4(7 r₁r₂z₁z₂ B_{2,2,2} - 2 r₁z₁ B_{1,3,3} - 2 r₂z₂ B_{3,1,3} - 2 r₁r₂z₁z₂ B_{3,3,1})`
/// with `B_{j,h,ℓ} = ((1+r₁z₁)/2)^j ((1+r₂z₂)/2)^h ((1+r₁r₂z₁z₂)/2)^ℓ`.
pub fn butterfly_combination(r1: Complex64, r2: Complex64) -> LaurentSymbol {
    let half = cx(0.5);
    let lin = |e: IVec, r: Complex64| {
        LaurentSymbol::from_terms(2, [(vec![0, 0], half), (e, r * 0.5)]).expect("2d")
    };
    let f1 = lin(vec![1, 0], r1);
    let f2 = lin(vec![0, 1], r2);
    let f3 = lin(vec![1, 1], r1 * r2);
    let b = |j, h, l| f1.pow(j).mul(&f2.pow(h)).mul(&f3.pow(l));
    let mono = |e: IVec, c: Complex64| LaurentSymbol::monomial(e, c);
    mono(vec![1, 1], 7.0 * r1 * r2)
        .mul(&b(2, 2, 2))
        .add(&mono(vec![1, 0], -2.0 * r1).mul(&b(1, 3, 3)))
        .add(&mono(vec![0, 1], -2.0 * r2).mul(&b(3, 1, 3)))
        .add(&mono(vec![1, 1], -2.0 * r1 * r2).mul(&b(3, 3, 1)))
        .scale(cx(4.0))
}

/// Interpolatory butterfly scheme with `M = 2I`, anchored so the centre tap sits at the origin.
///
/// Level `k` is `(r₁z₁)^{-3}(r₂z₂)^{-3}` times [`butterfly_combination`]; its
/// coefficient at `α` is `r_k^α` times the stationary coefficient, which is
/// built once from exact dyadic arithmetic.
pub fn butterfly(lambda: [Complex64; 2]) -> Result<SchemeSpec> {
    let dil = DilationMatrix::scalar(2, 2)?;
    let stationary = butterfly_combination(cx(1.0), cx(1.0)).shift(&[-3, -3]);
    let d = dil.clone();
    Ok(SchemeSpec::family("butterfly", dil, move |k| {
        Ok(stationary.modulate(&exponent_row(&d, &lambda, k)?))
    })
    .with_tau(Parametrization::zero(2)))
}

/// Representatives of `Z^2 / M Z^2` for the sheared dilation used by [`sheared_convolution`].
pub const SHEARED_DIGITS: [[i64; 2]; 4] = [[0, 0], [1, 0], [1, 1], [2, 1]];

pub fn sheared_dilation() -> DilationMatrix {
    DilationMatrix::new(2, vec![2, 1, 0, 2]).expect("valid dilation")
}

/// `(1/4) b_k(z)^2` with `b_k(z) = Σ_{ε ∈ E} r_k^ε z^ε` and `M = [[2,1],[0,2]]`.
/// The normalized variant multiplies by `r_k^{-(Mτ-τ)}` for `τ = (1,1)`.
pub fn sheared_convolution(lambda: [Complex64; 2], normalized: bool) -> Result<SchemeSpec> {
    let dil = sheared_dilation();
    let digits: Vec<IVec> = SHEARED_DIGITS.iter().map(|d| d.to_vec()).collect();
    let tau = if normalized {
        Parametrization::new(vec![1.0, 1.0])
    } else {
        Parametrization::zero(2)
    };
    let c = tau.shift_vector(&dil)?;
    let d = dil.clone();
    let name = if normalized {
        "sheared_convolution (normalized)"
    } else {
        "sheared_convolution"
    };
    Ok(SchemeSpec::family(name, dil, move |k| {
        let mu = exponent_row(&d, &lambda, k)?;
        let b = geometric(&mu, &digits);
        let mu_c: Complex64 = mu.iter().zip(&c).map(|(m, ci)| m * ci).sum();
        Ok(b.mul(&b).scale((-mu_c).exp() * 0.25))
    })
    .with_tau(tau))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sqrt3Variant {
    Approximating,
    Interpolatory,
}

pub fn sqrt3_dilation() -> DilationMatrix {
    DilationMatrix::new(2, vec![1, 2, -2, -1]).expect("valid dilation")
}

pub fn sqrt3_symbol(variant: Sqrt3Variant) -> LaurentSymbol {
    let terms: Vec<(IVec, f64)> = match variant {
        Sqrt3Variant::Approximating => {
            let sixth = [[1, 1], [-1, -1], [-1, 2], [-2, 1], [1, -2], [2, -1]];
            let third = [[-1, 0], [0, 1], [1, -1], [0, -1], [1, 0], [-1, 1]];
            sixth
                .iter()
                .map(|e| (e.to_vec(), 1.0 / 6.0))
                .chain(third.iter().map(|e| (e.to_vec(), 1.0 / 3.0)))
                .collect()
        }
        Sqrt3Variant::Interpolatory => {
            let far = [[-2, 0], [-2, 2], [0, 2], [2, 0], [2, -2], [0, -2]];
            let near = [[-1, 0], [-1, 1], [0, 1], [1, 0], [1, -1], [0, -1]];
            std::iter::once((vec![0, 0], 1.0))
                .chain(far.iter().map(|e| (e.to_vec(), -1.0 / 9.0)))
                .chain(near.iter().map(|e| (e.to_vec(), 4.0 / 9.0)))
                .collect()
        }
    };
    LaurentSymbol::from_terms(2, terms.into_iter().map(|(e, c)| (e, cx(c)))).expect("2d")
}

/// Stationary `√3` scheme with `M = [[1,2],[-2,-1]]`.
pub fn sqrt3(variant: Sqrt3Variant) -> SchemeSpec {
    let name = match variant {
        Sqrt3Variant::Approximating => "sqrt3 (approximating)",
        Sqrt3Variant::Interpolatory => "sqrt3 (interpolatory)",
    };
    SchemeSpec::stationary(name, sqrt3_dilation(), sqrt3_symbol(variant))
        .expect("2d symbol")
        .with_tau(Parametrization::zero(2))
}

// ---- catalog listing and instantiation ----

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub lambda: Complex64,
    #[serde(default = "one_u32")]
    pub n: u32,
}

fn one_u32() -> u32 {
    1
}

/// Parameters accepted by [`instantiate`]. Complex values are `[re, im]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<Complex64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<Factor>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<Sqrt3Variant>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamDoc {
    pub name: &'static str,
    pub kind: &'static str,
    pub default: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub description: &'static str,
    pub dimension: &'static str,
    pub params: Vec<ParamDoc>,
    pub documented_tau: &'static str,
    pub documented_space: &'static str,
}

fn p(name: &'static str, kind: &'static str, default: &'static str) -> ParamDoc {
    ParamDoc {
        name,
        kind,
        default,
    }
}

pub fn entries() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            id: "exp_bspline",
            description: "exponential B-spline: K_k (sum_{e<m} r_k^e z^e)^n, M = (m)",
            dimension: "1",
            params: vec![
                p("m", "integer >= 2", "2"),
                p("n", "integer >= 1", "1"),
                p("lambda", "[[re, im]]", "[[0, 0]]"),
                p("tau", "real; if given K_k = m^(1-n) r_k^(-(m-1) tau)", "none (K_k = 1)"),
            ],
            documented_tau: "tau if given, else 0 for n = 1",
            documented_space: "{e^(lambda x)}; also x e^(lambda x) when n > 1 and tau = n/2",
        },
        CatalogEntry {
            id: "exp_product",
            description: "product of geometric factors (sum_{e<m} e^(lambda_i m^-(k+1) e) z^e)^(n_i), M = (m)",
            dimension: "1",
            params: vec![
                p("m", "integer >= 2", "2"),
                p("factors", "[{lambda: [re, im], n: integer}]", "required"),
                p("tau", "real; scales levels to satisfy the order 0 condition at the first factor", "none"),
            ],
            documented_tau: "tau if given",
            documented_space: "{e^(lambda_i x)}; for two factors with n_1 = n_2 = n and tau = n both exponentials",
        },
        CatalogEntry {
            id: "exp_box_spline",
            description: "exponential box spline: sum_{e in {0..n-1}^s} r_k^e z^e, M = nI",
            dimension: "len(lambda)",
            params: vec![p("n", "integer >= 2", "2"), p("lambda", "[[re, im], ...]", "[[0, 0], [0, 0]]")],
            documented_tau: "0",
            documented_space: "{e^(lambda . x)}",
        },
        CatalogEntry {
            id: "dual4_binary",
            description: "binary non-stationary dual 4-point scheme reproducing conics, 8 taps on z^-4..z^3",
            dimension: "1",
            params: vec![p("lambda", "[[re, im]]", "[[1, 0]]")],
            documented_tau: "-1/2",
            documented_space: "span{1, x, e^(lambda x), e^(-lambda x)}",
        },
        CatalogEntry {
            id: "dual4_ternary",
            description: "ternary non-stationary dual 4-point scheme reproducing conics, 12 taps on z^-6..z^5",
            dimension: "1",
            params: vec![p("lambda", "[[re, im]]", "[[1, 0]]")],
            documented_tau: "-1/4",
            documented_space: "span{1, x, e^(lambda x), e^(-lambda x)}",
        },
        CatalogEntry {
            id: "butterfly",
            description: "non-stationary interpolatory butterfly scheme, M = 2I, centre tap at the origin",
            dimension: "2",
            params: vec![p("lambda", "[[re, im], [re, im]]", "[[1, 0], [1, 0]]")],
            documented_tau: "(0, 0)",
            documented_space: "{x^g e^(lambda . x) : |g| <= 3}",
        },
        CatalogEntry {
            id: "sheared_convolution",
            description: "(1/4) b_k(z)^2 with b_k = sum_{e in E} r_k^e z^e, M = [[2,1],[0,2]]",
            dimension: "2",
            params: vec![
                p("lambda", "[[re, im], [re, im]]", "[[1, 0], [1, 0]]"),
                p("normalized", "bool; multiplies level k by r_k^-(M tau - tau) with tau = (1, 1)", "false"),
            ],
            documented_tau: "(0, 0); (1, 1) when normalized",
            documented_space: "{e^(lambda . x)}; {x^g e^(lambda . x) : |g| <= 1} when normalized",
        },
        CatalogEntry {
            id: "sqrt3",
            description: "stationary sqrt(3) schemes with M = [[1,2],[-2,-1]]",
            dimension: "2",
            params: vec![p("variant", "\"approximating\" | \"interpolatory\"", "approximating")],
            documented_tau: "(0, 0)",
            documented_space: "polynomials of degree <= 1 (approximating) or <= 2 (interpolatory)",
        },
    ]
}

pub fn ids() -> Vec<&'static str> {
    entries().into_iter().map(|e| e.id).collect()
}

fn lambda_param(params: &CatalogParams, dim: usize, default: f64) -> Result<Vec<Complex64>> {
    match &params.lambda {
        None => Ok(vec![cx(default); dim]),
        Some(l) if l.len() == dim => Ok(l.clone()),
        Some(l) => Err(Error::DimensionMismatch {
            expected: dim,
            found: l.len(),
        }),
    }
}

fn pair2(v: Vec<Complex64>) -> [Complex64; 2] {
    [v[0], v[1]]
}

/// Builds a catalog scheme. The documented `τ` is attached when there is one.
pub fn instantiate(id: &str, params: &CatalogParams) -> Result<SchemeSpec> {
    let mut scheme = match id {
        "exp_bspline" => {
            let lambda = lambda_param(params, 1, 0.0)?[0];
            let norm = params
                .tau
                .map_or(Normalization::None, Normalization::ForTau);
            exp_bspline(params.m.unwrap_or(2), lambda, params.n.unwrap_or(1), norm)?
        }
        "exp_product" => {
            let factors: Vec<(Complex64, u32)> = params
                .factors
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("exp_product needs factors".into()))?
                .iter()
                .map(|f| (f.lambda, f.n))
                .collect();
            let norm = params.tau.map_or(ProductNormalization::None, |tau| {
                ProductNormalization::Anchor { tau }
            });
            let mut s = exp_product(params.m.unwrap_or(2), &factors, norm)?;
            s.tau = params.tau.map(|t| Parametrization::new(vec![t]));
            s
        }
        "exp_box_spline" => {
            let lambda = match &params.lambda {
                Some(l) => l.clone(),
                None => vec![cx(0.0); 2],
            };
            exp_box_spline(
                params.m.or(params.n.map(|n| n as usize)).unwrap_or(2),
                lambda,
            )?
        }
        "dual4_binary" => dual4_binary(lambda_param(params, 1, 1.0)?[0])?,
        "dual4_ternary" => dual4_ternary(lambda_param(params, 1, 1.0)?[0])?,
        "butterfly" => butterfly(pair2(lambda_param(params, 2, 1.0)?))?,
        "sheared_convolution" => sheared_convolution(
            pair2(lambda_param(params, 2, 1.0)?),
            params.normalized.unwrap_or(false),
        )?,
        "sqrt3" => sqrt3(params.variant.unwrap_or(Sqrt3Variant::Approximating)),
        other => return Err(Error::UnknownCatalogId(other.to_string())),
    };
    scheme.catalog = Some(CatalogInstance {
        id: id.to_string(),
        params: serde_json::to_value(params)?,
    });
    Ok(scheme)
}

/// The space the scheme is documented to reproduce with its documented `τ`.
pub fn documented_space(id: &str, params: &CatalogParams) -> Result<ExpPolySpace> {
    let zero1 = vec![cx(0.0)];
    match id {
        "exp_bspline" => {
            let lambda = lambda_param(params, 1, 0.0)?;
            let n = params.n.unwrap_or(1);
            let with_slope = n > 1 && params.tau == Some(n as f64 / 2.0);
            Ok(ExpPolySpace::exp_polynomials(lambda, u32::from(with_slope)))
        }
        "exp_product" => {
            let factors = params
                .factors
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("exp_product needs factors".into()))?;
            let pairs = factors
                .iter()
                .map(|f| ExpPolyPair::new(vec![0], vec![f.lambda]))
                .collect();
            ExpPolySpace::new(1, pairs)
        }
        "exp_box_spline" => {
            let lambda = params.lambda.clone().unwrap_or_else(|| vec![cx(0.0); 2]);
            Ok(ExpPolySpace::exp_polynomials(lambda, 0))
        }
        "dual4_binary" | "dual4_ternary" => {
            let l = lambda_param(params, 1, 1.0)?[0];
            ExpPolySpace::new(
                1,
                vec![
                    ExpPolyPair::new(vec![1], zero1.clone()),
                    ExpPolyPair::new(vec![0], vec![l]),
                    ExpPolyPair::new(vec![0], vec![-l]),
                ],
            )
        }
        "butterfly" => Ok(ExpPolySpace::exp_polynomials(
            lambda_param(params, 2, 1.0)?,
            3,
        )),
        "sheared_convolution" => {
            let degree = u32::from(params.normalized.unwrap_or(false));
            Ok(ExpPolySpace::exp_polynomials(
                lambda_param(params, 2, 1.0)?,
                degree,
            ))
        }
        "sqrt3" => Ok(ExpPolySpace::polynomials(
            2,
            match params.variant.unwrap_or(Sqrt3Variant::Approximating) {
                Sqrt3Variant::Approximating => 1,
                Sqrt3Variant::Interpolatory => 2,
            },
        )),
        other => Err(Error::UnknownCatalogId(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::is_transversal;

    #[test]
    fn bspline_symbols() {
        let s = exp_bspline(2, cx(0.0), 1, Normalization::None).unwrap();
        assert_eq!(
            s.symbol_at(3).unwrap(),
            LaurentSymbol::from_real_coeffs(0, &[1.0, 1.0])
        );
        let lam = 0.7;
        let s = exp_bspline(3, cx(lam), 1, Normalization::None).unwrap();
        let a = s.symbol_at(2).unwrap();
        assert_eq!(a.len(), 3);
        let r = (lam / 27.0).exp();
        assert!((a.coeff(&[2]).re - r * r).abs() < 1e-15);
    }

    #[test]
    fn product_with_equal_factors_is_power() {
        let l = cx(0.9);
        let a = exp_product(2, &[(l, 1), (l, 1)], ProductNormalization::None).unwrap();
        let b = exp_bspline(2, l, 2, Normalization::None).unwrap();
        for k in 0..4 {
            assert_eq!(a.symbol_at(k).unwrap(), b.symbol_at(k).unwrap());
        }
    }

    #[test]
    fn dual4_constructions_agree() {
        for lam in [cx(1.0), Complex64::new(0.0, 1.0), cx(0.3), cx(2.5)] {
            for k in 0..=10 {
                let a = dual4_binary_coefficients(lam, k).unwrap();
                let b = dual4_binary_factored(lam, k).unwrap();
                assert!(a.max_abs_diff(&b) < 1e-12, "binary k={k}");
                let a = dual4_ternary_coefficients(lam, k).unwrap();
                let b = dual4_ternary_factored(lam, k).unwrap();
                assert!(a.max_abs_diff(&b) < 1e-12, "ternary k={k}");
            }
        }
    }

    #[test]
    fn dual4_tap_counts_and_symmetry() {
        let a = dual4_binary(cx(1.0)).unwrap().symbol_at(2).unwrap();
        assert_eq!(a.support_box(), Some((vec![-4], vec![3])));
        assert_eq!(a.len(), 8);
        // c_{i,2} = c_{i,1}: the mask is symmetric about -1/2
        for e in -4..=3 {
            assert_eq!(a.coeff(&[e]), a.coeff(&[-1 - e]));
        }
        let t = dual4_ternary(cx(1.0)).unwrap().symbol_at(2).unwrap();
        assert_eq!(t.support_box(), Some((vec![-6], vec![5])));
        assert_eq!(t.len(), 12);
    }

    #[test]
    fn dual4_guards_name_the_factor() {
        // w = cos(h/2) with h = i*theta; w = 0 at theta = pi 2^{k+1}
        let lam = Complex64::new(0.0, std::f64::consts::PI * 2.0);
        match dual4_binary_coefficients(lam, 0) {
            Err(Error::VanishingDenominator { k: 0, factor: "w" }) => {}
            other => panic!("{other:?}"),
        }
        // w = -1 at theta = 2 pi * 2
        let lam = Complex64::new(0.0, 4.0 * std::f64::consts::PI);
        assert!(matches!(
            dual4_binary_coefficients(lam, 0),
            Err(Error::VanishingDenominator { factor: "w+1", .. })
        ));
        // ternary: w = 1/2 at theta/2 = pi/3 with theta = lambda / 3
        let lam = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        assert!(matches!(
            dual4_ternary_coefficients(lam, 0),
            Err(Error::VanishingDenominator { factor: "2w-1", .. })
        ));
        assert!(dual4_binary(Complex64::new(0.0, 2.0 * std::f64::consts::PI)).is_err());
    }

    #[test]
    fn limit_masks_are_exact() {
        let sum: i64 = DUAL4_BINARY_LIMIT.iter().sum();
        assert_eq!(sum, 256);
        let sum: i64 = DUAL4_TERNARY_LIMIT.iter().sum();
        assert_eq!(sum, 3 * 1296);
        // lambda = 0 is the stationary scheme itself
        let a = dual4_binary(cx(0.0)).unwrap().symbol_at(0).unwrap();
        assert!(a.max_abs_diff(&dual4_binary_limit()) < 1e-15);
    }

    #[test]
    fn butterfly_is_shifted_printed_combination() {
        let lambda = [cx(1.0), cx(0.5)];
        let s = butterfly(lambda).unwrap();
        let d = DilationMatrix::scalar(2, 2).unwrap();
        for k in 0..3 {
            let mu = exponent_row(&d, &lambda, k).unwrap();
            let printed = butterfly_combination(mu[0].exp(), mu[1].exp());
            let rescaled = s
                .symbol_at(k)
                .unwrap()
                .shift(&[3, 3])
                .scale(((mu[0] + mu[1]) * 3.0).exp());
            assert!(printed.max_abs_diff(&rescaled) < 1e-12);
        }
        let stat = butterfly_combination(cx(1.0), cx(1.0));
        let total: Complex64 = stat.iter().map(|(_, c)| *c).sum();
        assert_eq!(total, cx(4.0));
    }

    #[test]
    fn sheared_digits_cover_cosets() {
        let d = sheared_dilation();
        let digits: Vec<IVec> = SHEARED_DIGITS.iter().map(|x| x.to_vec()).collect();
        assert!(is_transversal(&d, &digits));
    }

    #[test]
    fn sqrt3_symbols() {
        let one = [cx(1.0), cx(1.0)];
        let a = sqrt3_symbol(Sqrt3Variant::Approximating);
        assert!((a.eval(&one).unwrap() - cx(3.0)).norm() < 1e-14);
        let b = sqrt3_symbol(Sqrt3Variant::Interpolatory);
        assert!((b.eval(&one).unwrap() - cx(3.0)).norm() < 1e-14);
        let d = sqrt3_dilation();
        for (_, part) in a.decompose(&d) {
            assert!((part.eval(&one).unwrap() - cx(1.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn instantiate_all_ids() {
        assert_eq!(ids().len(), 8);
        for id in ids() {
            let params = if id == "exp_product" {
                CatalogParams {
                    factors: Some(vec![
                        Factor {
                            lambda: cx(1.0),
                            n: 1,
                        },
                        Factor {
                            lambda: cx(-1.0),
                            n: 1,
                        },
                    ]),
                    tau: Some(1.0),
                    ..Default::default()
                }
            } else {
                CatalogParams::default()
            };
            let s = instantiate(id, &params).unwrap();
            s.symbol_at(0).unwrap();
            documented_space(id, &params).unwrap();
        }
        assert!(matches!(
            instantiate("nope", &CatalogParams::default()),
            Err(Error::UnknownCatalogId(_))
        ));
    }
}
