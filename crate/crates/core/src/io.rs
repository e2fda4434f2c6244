//! JSON and CSV file formats. Complex numbers are always `[re, im]`.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::catalog::{self, CatalogParams};
use crate::engine::GridData;
use crate::error::{Error, Result};
use crate::lattice::{DilationMatrix, IVec, Parametrization};
use crate::scheme::{SchemeSpec, SymbolRule};
use crate::space::{ExpPolyPair, ExpPolySpace};
use crate::symbol::{LaurentSymbol, Term};

pub const CATALOG_PREFIX: &str = "catalog:";
pub const EXPLICIT: &str = "explicit";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeFile {
    pub name: String,
    pub dimension: usize,
    /// Row-major.
    pub dilation: Vec<i64>,
    /// `"catalog:<id>"` or `"explicit"`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<Vec<Term>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<Vec<Term>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<Vec<f64>>,
}

impl SchemeFile {
    pub fn to_scheme(&self) -> Result<SchemeSpec> {
        let dilation = DilationMatrix::new(self.dimension, self.dilation.clone())?;
        let mut scheme = if let Some(id) = self.kind.strip_prefix(CATALOG_PREFIX) {
            let params: CatalogParams = match &self.params {
                Some(v) => serde_json::from_value(v.clone())?,
                None => CatalogParams::default(),
            };
            let s = catalog::instantiate(id, &params)?;
            if s.dilation != dilation {
                return Err(Error::Format(format!(
                    "dilation {:?} does not match catalog scheme {id} ({:?})",
                    self.dilation,
                    s.dilation.entries()
                )));
            }
            s
        } else if self.kind == EXPLICIT {
            let tail = self
                .tail
                .as_ref()
                .ok_or_else(|| Error::Format("explicit scheme needs a tail symbol".into()))?;
            let levels = self
                .levels
                .iter()
                .map(|t| LaurentSymbol::from_term_list(self.dimension, t))
                .collect::<Result<Vec<_>>>()?;
            let tail = LaurentSymbol::from_term_list(self.dimension, tail)?;
            SchemeSpec::new(
                self.name.clone(),
                dilation,
                SymbolRule::Explicit { levels, tail },
            )?
        } else {
            return Err(Error::Format(format!(
                "unknown scheme kind {:?}",
                self.kind
            )));
        };
        scheme.name = self.name.clone();
        if let Some(t) = &self.tau {
            if t.len() != self.dimension {
                return Err(Error::DimensionMismatch {
                    expected: self.dimension,
                    found: t.len(),
                });
            }
            scheme.tau = Some(Parametrization::new(t.clone()));
        }
        Ok(scheme)
    }

    /// Catalog schemes are written by id unless `explicit_levels` is given, in
    /// which case levels `0..n` are listed and level `n` becomes the tail.
    pub fn from_scheme(scheme: &SchemeSpec, explicit_levels: Option<usize>) -> Result<Self> {
        let mut file = SchemeFile {
            name: scheme.name.clone(),
            dimension: scheme.dim(),
            dilation: scheme.dilation.entries().to_vec(),
            kind: EXPLICIT.into(),
            params: None,
            levels: Vec::new(),
            tail: None,
            tau: scheme.tau.as_ref().map(|t| t.as_slice().to_vec()),
        };
        match (explicit_levels, &scheme.catalog, &scheme.rule) {
            (None, Some(c), _) => {
                file.kind = format!("{CATALOG_PREFIX}{}", c.id);
                file.params = Some(c.params.clone());
            }
            (None, None, SymbolRule::Stationary(s)) => file.tail = Some(s.to_terms()),
            (None, None, SymbolRule::Explicit { levels, tail }) => {
                file.levels = levels.iter().map(LaurentSymbol::to_terms).collect();
                file.tail = Some(tail.to_terms());
            }
            (None, None, SymbolRule::Family(_)) => {
                return Err(Error::InvalidParameter(
                    "scheme has no closed form in files; give a number of explicit levels".into(),
                ))
            }
            (Some(n), _, _) => {
                file.levels = (0..n)
                    .map(|k| Ok(scheme.symbol_at(k)?.to_terms()))
                    .collect::<Result<_>>()?;
                file.tail = Some(scheme.symbol_at(n)?.to_terms());
            }
        }
        Ok(file)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairFile {
    pub gamma: Vec<u32>,
    pub lambda: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceFile {
    pub pairs: Vec<PairFile>,
}

impl SpaceFile {
    /// Missing lower-order pairs are added with a warning.
    pub fn to_space(&self) -> Result<ExpPolySpace> {
        let dim = self
            .pairs
            .first()
            .map(|p| p.gamma.len())
            .ok_or_else(|| Error::Format("space has no pairs".into()))?;
        let pairs = self
            .pairs
            .iter()
            .map(|p| ExpPolyPair::new(p.gamma.clone(), p.lambda.clone()))
            .collect();
        ExpPolySpace::new(dim, pairs)
    }

    pub fn from_space(space: &ExpPolySpace) -> Self {
        SpaceFile {
            pairs: space
                .pairs()
                .iter()
                .map(|p| PairFile {
                    gamma: p.gamma.clone(),
                    lambda: p.lambda.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridValue {
    pub idx: IVec,
    pub c: Complex64,
    /// Parameter point, written on output and ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub dimension: usize,
    #[serde(default)]
    pub level: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<Vec<f64>>,
    pub values: Vec<GridValue>,
}

impl GridFile {
    pub fn to_grid(&self) -> Result<GridData> {
        let tau = match &self.tau {
            Some(t) if t.len() != self.dimension => {
                return Err(Error::DimensionMismatch {
                    expected: self.dimension,
                    found: t.len(),
                })
            }
            Some(t) => Parametrization::new(t.clone()),
            None => Parametrization::zero(self.dimension),
        };
        let mut g = GridData::new(self.dimension, self.level, tau);
        for v in &self.values {
            if v.idx.len() != self.dimension {
                return Err(Error::DimensionMismatch {
                    expected: self.dimension,
                    found: v.idx.len(),
                });
            }
            if g.values.insert(v.idx.clone(), v.c).is_some() {
                return Err(Error::Format(format!("duplicate index {:?}", v.idx)));
            }
        }
        Ok(g)
    }

    /// Attaches parameter points when a dilation matrix is given.
    pub fn from_grid(g: &GridData, m: Option<&DilationMatrix>) -> Result<Self> {
        let pts = match m {
            Some(m) => Some(g.points(m)?),
            None => None,
        };
        let values = g
            .values
            .iter()
            .enumerate()
            .map(|(n, (idx, c))| GridValue {
                idx: idx.clone(),
                c: *c,
                t: pts.as_ref().map(|p| p[n].clone()),
            })
            .collect();
        Ok(GridFile {
            dimension: g.dim,
            level: g.level,
            tau: Some(g.tau.as_slice().to_vec()),
            values,
        })
    }
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header `i0.. t0.. re im`, one row per stored index.
pub fn write_grid_csv<W: Write>(out: W, g: &GridData, m: &DilationMatrix) -> Result<()> {
    let s = g.dim;
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..s).map(|i| format!("i{i}")).collect();
    header.extend((0..s).map(|i| format!("t{i}")));
    header.extend(["re".to_string(), "im".to_string()]);
    w.write_record(&header)?;
    for ((idx, c), t) in g.values.iter().zip(g.points(m)?) {
        let mut row: Vec<String> = idx.iter().map(i64::to_string).collect();
        row.extend(t.iter().copied().map(fmt_f64));
        row.push(fmt_f64(c.re));
        row.push(fmt_f64(c.im));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Header `t0.. re im`.
pub fn write_samples_csv<W: Write>(
    out: W,
    dim: usize,
    samples: &[(Vec<f64>, Complex64)],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..dim).map(|i| format!("t{i}")).collect();
    header.extend(["re".to_string(), "im".to_string()]);
    w.write_record(&header)?;
    for (t, c) in samples {
        let mut row: Vec<String> = t.iter().copied().map(fmt_f64).collect();
        row.push(fmt_f64(c.re));
        row.push(fmt_f64(c.im));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Sqrt3Variant;

    #[test]
    fn catalog_file_round_trip() {
        let params = CatalogParams {
            lambda: Some(vec![Complex64::new(0.0, 1.0)]),
            ..Default::default()
        };
        let s = catalog::instantiate("dual4_binary", &params).unwrap();
        let f = SchemeFile::from_scheme(&s, None).unwrap();
        assert_eq!(f.kind, "catalog:dual4_binary");
        let text = serde_json::to_string(&f).unwrap();
        let back: SchemeFile = serde_json::from_str(&text).unwrap();
        let s2 = back.to_scheme().unwrap();
        for k in 0..4 {
            assert_eq!(s.symbol_at(k).unwrap(), s2.symbol_at(k).unwrap());
        }
        assert_eq!(s2.tau, s.tau);
    }

    #[test]
    fn explicit_file_is_lossless() {
        let s = catalog::dual4_ternary(Complex64::new(0.3, 0.7)).unwrap();
        let f = SchemeFile::from_scheme(&s, Some(3)).unwrap();
        let text = serde_json::to_string(&f).unwrap();
        let s2 = serde_json::from_str::<SchemeFile>(&text)
            .unwrap()
            .to_scheme()
            .unwrap();
        for k in 0..6 {
            assert_eq!(s.symbol_at(k.min(3)).unwrap(), s2.symbol_at(k).unwrap());
        }
    }

    #[test]
    fn explicit_needs_tail() {
        let f = SchemeFile {
            name: "x".into(),
            dimension: 1,
            dilation: vec![2],
            kind: EXPLICIT.into(),
            params: None,
            levels: vec![],
            tail: None,
            tau: None,
        };
        assert!(matches!(f.to_scheme(), Err(Error::Format(_))));
    }

    #[test]
    fn catalog_dilation_must_match() {
        let params = CatalogParams {
            variant: Some(Sqrt3Variant::Interpolatory),
            ..Default::default()
        };
        let mut f = SchemeFile::from_scheme(&catalog::instantiate("sqrt3", &params).unwrap(), None)
            .unwrap();
        assert_eq!(f.kind, "catalog:sqrt3");
        f.dilation = vec![2, 0, 0, 2];
        assert!(f.to_scheme().is_err());
    }

    #[test]
    fn grid_round_trip() {
        let mut g = GridData::new(2, 1, Parametrization::new(vec![0.5, 0.0]));
        g.values.insert(vec![-1, 3], Complex64::new(0.1, -2.0));
        g.values.insert(vec![0, 0], Complex64::new(1.0 / 3.0, 0.0));
        let m = DilationMatrix::scalar(2, 2).unwrap();
        let f = GridFile::from_grid(&g, Some(&m)).unwrap();
        assert_eq!(f.values[0].t.as_ref().unwrap(), &vec![-0.25, 1.5]);
        let text = serde_json::to_string(&f).unwrap();
        let back = serde_json::from_str::<GridFile>(&text)
            .unwrap()
            .to_grid()
            .unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn grid_csv_layout() {
        let g = GridData::delta(1, 0, Parametrization::zero(1));
        let mut buf = Vec::new();
        write_grid_csv(&mut buf, &g, &DilationMatrix::scalar(2, 1).unwrap()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("i0,t0,re,im"));
        let row: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|x| x.parse().unwrap())
            .collect();
        assert_eq!(row, vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn space_file_closes_downward() {
        let f: SpaceFile =
            serde_json::from_str(r#"{"pairs": [{"gamma": [2], "lambda": [[0, 0]]}]}"#).unwrap();
        let sp = f.to_space().unwrap();
        assert_eq!(sp.len(), 3);
    }
}
