//! Python bindings for `nsubdiv`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyTuple};

use nsubdiv::catalog::{self, CatalogParams};
use nsubdiv::io::{read_json, SchemeFile, SpaceFile};
use nsubdiv::lattice::IVec;
use nsubdiv::{
    checker, engine, DilationMatrix, Error, ExpPolyPair, ExpPolySpace, GridData, LaurentSymbol,
    Parametrization, SchemeSpec,
};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait OrPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> OrPy<T> for nsubdiv::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn json_to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn index_dict<'py>(
    py: Python<'py>,
    items: impl IntoIterator<Item = (IVec, Complex64)>,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for (idx, v) in items {
        d.set_item(PyTuple::new(py, idx)?, v)?;
    }
    Ok(d)
}

#[pyclass(
    name = "DilationMatrix",
    frozen,
    skip_from_py_object,
    module = "nsubdiv"
)]
#[derive(Clone)]
struct PyDilation(DilationMatrix);

#[pymethods]
impl PyDilation {
    /// Rows of an expanding integer matrix.
    #[new]
    fn new(rows: Vec<Vec<i64>>) -> PyResult<Self> {
        let dim = rows.len();
        let entries: Vec<i64> = rows.into_iter().flatten().collect();
        Ok(Self(DilationMatrix::new(dim, entries).py_err()?))
    }

    #[staticmethod]
    fn scalar(n: i64, dim: usize) -> PyResult<Self> {
        Ok(Self(DilationMatrix::scalar(n, dim).py_err()?))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.m()
    }

    #[getter]
    fn det(&self) -> i64 {
        self.0.det()
    }

    fn rows(&self) -> Vec<Vec<i64>> {
        self.0
            .entries()
            .chunks(self.0.dim())
            .map(<[i64]>::to_vec)
            .collect()
    }

    fn coset_reps(&self) -> Vec<IVec> {
        nsubdiv::coset_reps(&self.0)
    }

    /// Points of the dual coset set, all-ones first.
    fn dual_points(&self) -> Vec<Vec<Complex64>> {
        nsubdiv::dual_coset_points(&self.0)
            .into_iter()
            .map(|p| p.value)
            .collect()
    }

    fn reduce(&self, v: Vec<i64>) -> PyResult<IVec> {
        if v.len() != self.0.dim() {
            return Err(PyValueError::new_err("dimension mismatch"));
        }
        Ok(self.0.reduce(&v))
    }

    fn __repr__(&self) -> String {
        format!("DilationMatrix({:?})", self.rows())
    }
}

#[pyclass(
    name = "LaurentSymbol",
    frozen,
    skip_from_py_object,
    module = "nsubdiv"
)]
#[derive(Clone)]
struct PySymbol(LaurentSymbol);

#[pymethods]
impl PySymbol {
    /// `terms` maps exponent tuples to coefficients.
    #[new]
    fn new(dim: usize, terms: BTreeMap<IVec, Complex64>) -> PyResult<Self> {
        Ok(Self(LaurentSymbol::from_terms(dim, terms).py_err()?))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    /// `{exponent tuple: coefficient}`.
    fn terms<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        index_dict(py, self.0.iter().map(|(e, c)| (e.clone(), *c)))
    }

    fn coeff(&self, exp: Vec<i64>) -> Complex64 {
        self.0.coeff(&exp)
    }

    fn eval(&self, z: Vec<Complex64>) -> PyResult<Complex64> {
        self.0.eval(&z).py_err()
    }

    /// `Σ a_α q_γ(α) z^α`.
    fn weighted_derivative(&self, gamma: Vec<u32>, z: Vec<Complex64>) -> PyResult<Complex64> {
        self.0.weighted_derivative(&gamma, &z).py_err()
    }

    fn sub_symbols(&self, m: &PyDilation) -> Vec<(IVec, PySymbol)> {
        self.0
            .decompose(&m.0)
            .into_iter()
            .map(|(e, s)| (e, PySymbol(s)))
            .collect()
    }

    fn shift(&self, beta: Vec<i64>) -> Self {
        Self(self.0.shift(&beta))
    }

    fn __mul__(&self, other: &PySymbol) -> Self {
        Self(self.0.mul(&other.0))
    }

    fn __add__(&self, other: &PySymbol) -> Self {
        Self(self.0.add(&other.0))
    }

    fn __eq__(&self, other: &PySymbol) -> bool {
        self.0 == other.0
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("LaurentSymbol({})", self.0)
    }
}

#[pyclass(name = "Space", frozen, skip_from_py_object, module = "nsubdiv")]
#[derive(Clone)]
struct PySpace(ExpPolySpace);

#[pymethods]
impl PySpace {
    /// `pairs` is a list of `(gamma, lambda)`; lower-order pairs are added.
    #[new]
    fn new(pairs: Vec<(Vec<u32>, Vec<Complex64>)>) -> PyResult<Self> {
        let dim = pairs
            .first()
            .map(|p| p.0.len())
            .ok_or_else(|| PyValueError::new_err("no pairs"))?;
        let pairs = pairs
            .into_iter()
            .map(|(g, l)| ExpPolyPair::new(g, l))
            .collect();
        Ok(Self(ExpPolySpace::new(dim, pairs).py_err()?))
    }

    /// Every `x^γ e^{λ·x}` with `|γ| <= degree` for each `λ` given.
    #[staticmethod]
    fn exp_polynomials(lambda: Vec<Complex64>, degree: u32) -> Self {
        Self(ExpPolySpace::exp_polynomials(lambda, degree))
    }

    #[staticmethod]
    fn from_file(path: PathBuf) -> PyResult<Self> {
        Ok(Self(
            read_json::<SpaceFile>(&path)
                .py_err()?
                .to_space()
                .py_err()?,
        ))
    }

    fn pairs(&self) -> Vec<(Vec<u32>, Vec<Complex64>)> {
        self.0
            .pairs()
            .iter()
            .map(|p| (p.gamma.clone(), p.lambda.clone()))
            .collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyclass(name = "Scheme", frozen, skip_from_py_object, module = "nsubdiv")]
#[derive(Clone)]
struct PyScheme(SchemeSpec);

fn parse_params(params: Option<&str>) -> PyResult<CatalogParams> {
    serde_json::from_str(params.unwrap_or("{}")).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymethods]
impl PyScheme {
    /// Catalog scheme; `params` is a JSON object as accepted by the command line.
    #[staticmethod]
    #[pyo3(signature = (id, params=None))]
    fn catalog(id: &str, params: Option<&str>) -> PyResult<Self> {
        Ok(Self(
            catalog::instantiate(id, &parse_params(params)?).py_err()?,
        ))
    }

    #[staticmethod]
    fn stationary(name: &str, dilation: &PyDilation, symbol: &PySymbol) -> PyResult<Self> {
        Ok(Self(
            SchemeSpec::stationary(name, dilation.0.clone(), symbol.0.clone()).py_err()?,
        ))
    }

    #[staticmethod]
    fn from_file(path: PathBuf) -> PyResult<Self> {
        Ok(Self(
            read_json::<SchemeFile>(&path)
                .py_err()?
                .to_scheme()
                .py_err()?,
        ))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file: SchemeFile =
            serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self(file.to_scheme().py_err()?))
    }

    #[pyo3(signature = (levels=None))]
    fn to_json(&self, levels: Option<usize>) -> PyResult<String> {
        let file = SchemeFile::from_scheme(&self.0, levels).py_err()?;
        serde_json::to_string_pretty(&file).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name.clone()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn dilation(&self) -> PyDilation {
        PyDilation(self.0.dilation.clone())
    }

    #[getter]
    fn tau(&self) -> Option<Vec<f64>> {
        self.0.tau.as_ref().map(|t| t.as_slice().to_vec())
    }

    fn symbol(&self, k: usize) -> PyResult<PySymbol> {
        Ok(PySymbol(self.0.symbol_at(k).py_err()?))
    }

    fn shifted(&self, beta: Vec<i64>) -> Self {
        Self(self.0.shifted(beta))
    }

    fn with_tau(&self, tau: Vec<f64>) -> Self {
        Self(self.0.clone().with_tau(Parametrization::new(tau)))
    }

    fn __repr__(&self) -> String {
        format!("Scheme({:?}, dim={})", self.0.name, self.0.dim())
    }
}

#[pyfunction]
#[pyo3(signature = (scheme, space, kmin=0, kmax=5, tol=checker::DEFAULT_TOL))]
fn check_generation<'py>(
    py: Python<'py>,
    scheme: &PyScheme,
    space: &PySpace,
    kmin: usize,
    kmax: usize,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let rep = checker::check_generation(&scheme.0, &space.0, kmin..=kmax, tol).py_err()?;
    json_to_py(py, &rep)
}

#[pyfunction]
#[pyo3(signature = (scheme, space, tau, kmin=0, kmax=5, tol=checker::DEFAULT_TOL))]
fn check_reproduction<'py>(
    py: Python<'py>,
    scheme: &PyScheme,
    space: &PySpace,
    tau: Vec<f64>,
    kmin: usize,
    kmax: usize,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let rep = checker::check_reproduction(
        &scheme.0,
        &space.0,
        &Parametrization::new(tau),
        kmin..=kmax,
        tol,
    )
    .py_err()?;
    json_to_py(py, &rep)
}

#[pyfunction]
#[pyo3(signature = (scheme, space, tau, kmin=0, kmax=5, tol=checker::DEFAULT_TOL))]
fn stepwise_test<'py>(
    py: Python<'py>,
    scheme: &PyScheme,
    space: &PySpace,
    tau: Vec<f64>,
    kmin: usize,
    kmax: usize,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let rep = checker::stepwise_test(
        &scheme.0,
        &space.0,
        &Parametrization::new(tau),
        kmin..=kmax,
        None,
        tol,
    )
    .py_err()?;
    json_to_py(py, &rep)
}

#[pyfunction]
#[pyo3(signature = (scheme, space, k_probe=0, tol=checker::DEFAULT_TOL))]
fn solve_tau(scheme: &PyScheme, space: &PySpace, k_probe: usize, tol: f64) -> PyResult<Vec<f64>> {
    Ok(checker::solve_tau(&scheme.0, &space.0, k_probe, tol)
        .py_err()?
        .as_slice()
        .to_vec())
}

/// Scales level `k` so the order 0 condition at `lambda` holds with `tau`.
#[pyfunction]
fn normalize(scheme: &PyScheme, lambda: Vec<Complex64>, tau: Vec<f64>) -> PyResult<PyScheme> {
    Ok(PyScheme(
        checker::normalize(&scheme.0, &lambda, &Parametrization::new(tau)).py_err()?,
    ))
}

/// Refines `{index: value}` data sitting at `start_level`.
#[pyfunction]
#[pyo3(signature = (scheme, data, levels, start_level=0, tau=None))]
fn refine<'py>(
    py: Python<'py>,
    scheme: &PyScheme,
    data: BTreeMap<IVec, Complex64>,
    levels: usize,
    start_level: usize,
    tau: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyDict>> {
    let s = &scheme.0;
    let tau = tau
        .map(Parametrization::new)
        .or_else(|| s.tau.clone())
        .unwrap_or_else(|| Parametrization::zero(s.dim()));
    let mut g = GridData::new(s.dim(), start_level, tau);
    for (idx, v) in data {
        if idx.len() != s.dim() {
            return Err(PyValueError::new_err(
                "index dimension does not match the scheme",
            ));
        }
        g.values.insert(idx, v);
    }
    let out = engine::refine(s, &g, start_level, levels).py_err()?;
    index_dict(py, out.values)
}

/// `(t, value)` samples of the basic limit function after `rounds` steps.
#[pyfunction]
#[pyo3(signature = (scheme, rounds, start_level=0))]
fn limit_samples(
    scheme: &PyScheme,
    rounds: usize,
    start_level: usize,
) -> PyResult<Vec<(Vec<f64>, Complex64)>> {
    engine::basic_limit_samples(&scheme.0, rounds, start_level).py_err()
}

#[pyfunction]
fn is_interpolatory(symbol: &PySymbol, m: &PyDilation) -> bool {
    engine::is_interpolatory(&symbol.0, &m.0)
}

#[pyfunction]
fn catalog_ids() -> Vec<&'static str> {
    catalog::ids()
}

#[pyfunction]
fn catalog_entries(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    json_to_py(py, &catalog::entries())
}

#[pymodule]
#[pyo3(name = "nsubdiv")]
fn nsubdiv_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDilation>()?;
    m.add_class::<PySymbol>()?;
    m.add_class::<PySpace>()?;
    m.add_class::<PyScheme>()?;
    m.add_function(wrap_pyfunction!(check_generation, m)?)?;
    m.add_function(wrap_pyfunction!(check_reproduction, m)?)?;
    m.add_function(wrap_pyfunction!(stepwise_test, m)?)?;
    m.add_function(wrap_pyfunction!(solve_tau, m)?)?;
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(refine, m)?)?;
    m.add_function(wrap_pyfunction!(limit_samples, m)?)?;
    m.add_function(wrap_pyfunction!(is_interpolatory, m)?)?;
    m.add_function(wrap_pyfunction!(catalog_ids, m)?)?;
    m.add_function(wrap_pyfunction!(catalog_entries, m)?)?;
    m.add("DEFAULT_TOL", checker::DEFAULT_TOL)?;
    Ok(())
}
