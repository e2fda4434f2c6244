//! Level-indexed symbol families `k ↦ a^{[k]}` with their dilation matrix.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{DilationMatrix, Parametrization};
use crate::symbol::LaurentSymbol;

pub type SymbolFamily = Arc<dyn Fn(usize) -> Result<LaurentSymbol> + Send + Sync>;

#[derive(Clone)]
pub enum SymbolRule {
    Stationary(LaurentSymbol),
    /// `levels[k]` for `k < levels.len()`, then `tail` forever.
    Explicit {
        levels: Vec<LaurentSymbol>,
        tail: LaurentSymbol,
    },
    Family(SymbolFamily),
}

impl fmt::Debug for SymbolRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolRule::Stationary(s) => f.debug_tuple("Stationary").field(s).finish(),
            SymbolRule::Explicit { levels, tail } => f
                .debug_struct("Explicit")
                .field("levels", &levels.len())
                .field("tail", tail)
                .finish(),
            SymbolRule::Family(_) => f.write_str("Family(..)"),
        }
    }
}

/// Catalog id and parameters a scheme was built from, kept for re-emission.
#[derive(Clone, Debug, PartialEq)]
pub struct CatalogInstance {
    pub id: String,
    pub params: serde_json::Value,
}

#[derive(Clone, Debug)]
pub struct SchemeSpec {
    pub name: String,
    pub dilation: DilationMatrix,
    pub tau: Option<Parametrization>,
    pub rule: SymbolRule,
    pub catalog: Option<CatalogInstance>,
}

impl SchemeSpec {
    pub fn new(
        name: impl Into<String>,
        dilation: DilationMatrix,
        rule: SymbolRule,
    ) -> Result<Self> {
        let dim = dilation.dim();
        let check = |s: &LaurentSymbol| {
            if s.dim() == dim {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.dim(),
                })
            }
        };
        match &rule {
            SymbolRule::Stationary(s) => check(s)?,
            SymbolRule::Explicit { levels, tail } => {
                levels.iter().try_for_each(check)?;
                check(tail)?;
            }
            SymbolRule::Family(_) => {}
        }
        Ok(Self {
            name: name.into(),
            dilation,
            tau: None,
            rule,
            catalog: None,
        })
    }

    pub fn stationary(
        name: impl Into<String>,
        dilation: DilationMatrix,
        symbol: LaurentSymbol,
    ) -> Result<Self> {
        Self::new(name, dilation, SymbolRule::Stationary(symbol))
    }

    pub fn family<F>(name: impl Into<String>, dilation: DilationMatrix, f: F) -> Self
    where
        F: Fn(usize) -> Result<LaurentSymbol> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            dilation,
            tau: None,
            rule: SymbolRule::Family(Arc::new(f)),
            catalog: None,
        }
    }

    pub fn with_tau(mut self, tau: Parametrization) -> Self {
        self.tau = Some(tau);
        self
    }

    pub fn dim(&self) -> usize {
        self.dilation.dim()
    }

    pub fn is_stationary(&self) -> bool {
        matches!(self.rule, SymbolRule::Stationary(_))
    }

    pub fn symbol_at(&self, k: usize) -> Result<LaurentSymbol> {
        let s = match &self.rule {
            SymbolRule::Stationary(s) => s.clone(),
            SymbolRule::Explicit { levels, tail } => levels.get(k).unwrap_or(tail).clone(),
            SymbolRule::Family(f) => f(k)?,
        };
        if s.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: s.dim(),
            });
        }
        Ok(s)
    }

    /// Applies `f(k, a^{[k]})` to every level. Drops catalog provenance.
    pub fn map_levels<F>(&self, name: impl Into<String>, f: F) -> SchemeSpec
    where
        F: Fn(usize, LaurentSymbol) -> Result<LaurentSymbol> + Send + Sync + 'static,
    {
        let base = self.clone();
        SchemeSpec {
            name: name.into(),
            dilation: self.dilation.clone(),
            tau: None,
            rule: SymbolRule::Family(Arc::new(move |k| f(k, base.symbol_at(k)?))),
            catalog: None,
        }
    }

    /// `z^β a^{[k]}(z)` at every level.
    pub fn shifted(&self, beta: Vec<i64>) -> SchemeSpec {
        self.map_levels(
            format!("{} shifted by {:?}", self.name, beta),
            move |_, a| Ok(a.shift(&beta)),
        )
    }

    /// `K^{[k]} a^{[k]}(z)` with `K^{[k]} = factor(k)`.
    pub fn scaled<F>(&self, name: impl Into<String>, factor: F) -> SchemeSpec
    where
        F: Fn(usize) -> Result<Complex64> + Send + Sync + 'static,
    {
        self.map_levels(name, move |k, a| Ok(a.scale(factor(k)?)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(dim: usize) -> LaurentSymbol {
        LaurentSymbol::constant(dim, Complex64::new(1.0, 0.0))
    }

    #[test]
    fn explicit_levels_fall_back_to_tail() {
        let m = DilationMatrix::scalar(2, 1).unwrap();
        let a0 = LaurentSymbol::from_real_coeffs(0, &[1.0, 2.0]);
        let tail = LaurentSymbol::from_real_coeffs(0, &[1.0, 1.0]);
        let s = SchemeSpec::new(
            "e",
            m,
            SymbolRule::Explicit {
                levels: vec![a0.clone()],
                tail: tail.clone(),
            },
        )
        .unwrap();
        assert_eq!(s.symbol_at(0).unwrap(), a0);
        assert_eq!(s.symbol_at(1).unwrap(), tail);
        assert_eq!(s.symbol_at(40).unwrap(), tail);
    }

    #[test]
    fn dimension_is_checked() {
        let m = DilationMatrix::scalar(2, 2).unwrap();
        assert!(SchemeSpec::stationary("bad", m.clone(), one(1)).is_err());
        let fam = SchemeSpec::family("bad", m, |_| Ok(one(1)));
        assert!(fam.symbol_at(0).is_err());
    }

    #[test]
    fn shifted_and_scaled() {
        let m = DilationMatrix::scalar(2, 1).unwrap();
        let s = SchemeSpec::stationary("a", m, LaurentSymbol::from_real_coeffs(0, &[1.0, 1.0]))
            .unwrap();
        let t = s
            .shifted(vec![2])
            .scaled("half", |k| Ok(Complex64::new(0.5f64.powi(k as i32), 0.0)));
        assert_eq!(
            t.symbol_at(1).unwrap(),
            LaurentSymbol::from_real_coeffs(2, &[0.5, 0.5])
        );
    }
}
