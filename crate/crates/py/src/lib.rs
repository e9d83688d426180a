//! `pyweyllab`: Python access to coefficient vectors, grids, the arithmetic
//! helpers, the per-module reports and the counterexample constructions.
//! Structured reports come back as plain dicts.

use std::collections::BTreeMap;

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyList, PyString};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use weyllab::{counterexamples, expsum, incidence, kernel, levelsets, rationals, weights};

fn err(e: weyllab::Error) -> PyErr {
    match e {
        weyllab::Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for weyllab::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(err)
    }
}

fn value_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(u)) => u.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => PyString::new(py, s).into_any(),
        Value::Array(a) => {
            let list = PyList::empty(py);
            for x in a {
                list.append(value_to_py(py, x)?)?;
            }
            list.into_any()
        }
        Value::Object(m) => {
            let d = PyDict::new(py);
            for (k, x) in m {
                d.set_item(k, value_to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    value_to_py(py, &v)
}

/// Enum arguments use their serialized (kebab-case) names.
fn named<T: DeserializeOwned>(what: &str, name: &str) -> PyResult<T> {
    serde_json::from_value(Value::String(name.to_string()))
        .map_err(|_| PyValueError::new_err(format!("unknown {what} '{name}'")))
}

// ------------------------------------------------------------ classes

/// Coefficients `a_1..a_N` of `f(x,t) = sum a_n e(nx + n^2 t)`.
#[pyclass(name = "CoefficientVector", frozen, skip_from_py_object, module = "pyweyllab")]
#[derive(Clone)]
struct PyCoefficients(expsum::CoefficientVector);

#[pymethods]
impl PyCoefficients {
    #[new]
    fn new(values: Vec<Complex64>) -> PyResult<Self> {
        expsum::CoefficientVector::new(values).py().map(Self)
    }

    #[staticmethod]
    fn ones(n: usize) -> PyResult<Self> {
        expsum::CoefficientVector::ones(n).py().map(Self)
    }

    #[staticmethod]
    fn random_phase(n: usize, seed: u64) -> PyResult<Self> {
        expsum::CoefficientVector::random_phase(n, seed).py().map(Self)
    }

    #[staticmethod]
    fn random_gaussian(n: usize, seed: u64) -> PyResult<Self> {
        expsum::CoefficientVector::random_gaussian(n, seed).py().map(Self)
    }

    /// `ones`, `random-phase` or `random-gaussian`.
    #[staticmethod]
    #[pyo3(signature = (name, n, seed = 1))]
    fn preset(name: &str, n: usize, seed: u64) -> PyResult<Self> {
        let p: expsum::Preset = name.parse().py()?;
        p.build(n, seed).py().map(Self)
    }

    #[getter]
    fn n_max(&self) -> usize {
        self.0.n_max()
    }

    fn l2_norm(&self) -> f64 {
        self.0.l2_norm()
    }

    fn values(&self) -> Vec<Complex64> {
        self.0.values().to_vec()
    }

    fn __len__(&self) -> usize {
        self.0.n_max()
    }

    fn __repr__(&self) -> String {
        format!("CoefficientVector(N={}, norm={:.6})", self.0.n_max(), self.0.l2_norm())
    }
}

/// The `(oversample N) x (oversample N^2)` sampling grid of the torus.
#[pyclass(name = "TorusGrid", frozen, skip_from_py_object, module = "pyweyllab")]
#[derive(Clone, Copy)]
struct PyGrid(expsum::TorusGrid);

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (n, x_oversample = 4, t_oversample = 4))]
    fn new(n: usize, x_oversample: usize, t_oversample: usize) -> PyResult<Self> {
        expsum::TorusGrid::new(n, x_oversample, t_oversample).py().map(Self)
    }

    #[getter]
    fn nx(&self) -> usize {
        self.0.nx()
    }

    #[getter]
    fn nt(&self) -> usize {
        self.0.nt()
    }

    fn x_of(&self, j: usize) -> f64 {
        self.0.x_of(j)
    }

    fn t_of(&self, k: usize) -> f64 {
        self.0.t_of(k)
    }

    fn strip_of_row(&self, k: usize) -> usize {
        self.0.strip_of_row(k)
    }

    fn __repr__(&self) -> String {
        format!("TorusGrid(nx={}, nt={})", self.0.nx(), self.0.nt())
    }
}

/// A nonnegative measure on the cells of `B_R`.
#[pyclass(name = "Weight", frozen, skip_from_py_object, module = "pyweyllab")]
#[derive(Clone)]
struct PyWeight(weights::Weight);

#[pymethods]
impl PyWeight {
    #[staticmethod]
    fn uniform(n: u64, total: f64) -> PyResult<Self> {
        weights::Weight::uniform(n, total).py().map(Self)
    }

    /// Point masses `(x, t, mass)` with coordinates in `[0, R)`.
    #[staticmethod]
    fn from_points(n: u64, points: Vec<(f64, f64, f64)>) -> PyResult<Self> {
        weights::Weight::from_points(n, points).py().map(Self)
    }

    #[staticmethod]
    fn root_lattice(n: u64) -> PyResult<Self> {
        weights::Weight::root_lattice(n).py().map(Self)
    }

    #[staticmethod]
    fn random_one_dimensional(n: u64, seed: u64) -> PyResult<Self> {
        weights::random_one_dimensional(n, seed).py().map(Self)
    }

    #[staticmethod]
    fn greedy(coeffs: &PyCoefficients) -> PyResult<Self> {
        weights::greedy_adversarial(&coeffs.0).py().map(Self)
    }

    #[staticmethod]
    fn weyl_example(n: u64) -> PyResult<Self> {
        counterexamples::weyl_example_set(n).py().map(Self)
    }

    fn capped_to(&self, budget: f64) -> PyResult<Self> {
        self.0.capped_to(budget).py().map(Self)
    }

    #[getter]
    fn n(&self) -> u64 {
        self.0.n()
    }

    #[getter]
    fn r_scale(&self) -> u64 {
        self.0.r_scale()
    }

    fn total(&self) -> f64 {
        self.0.total()
    }

    /// Nonzero cells as `(x_cell, t_cell, mass)`.
    fn records(&self) -> PyResult<Vec<(u32, u32, f64)>> {
        Ok(self.0.records().py()?.into_iter().map(|r| (r.x_cell, r.t_cell, r.mass)).collect())
    }

    fn __repr__(&self) -> String {
        format!("Weight(R={}, total={})", self.0.r_scale(), self.0.total())
    }
}

// ---------------------------------------------------------- functions

#[pyfunction]
fn eval_direct(coeffs: &PyCoefficients, points: Vec<(f64, f64)>) -> PyResult<Vec<Complex64>> {
    expsum::eval_direct(&coeffs.0, &points).py()
}

/// Row `k` of the grid evaluation (all `x` samples at `t = t_of(k)`).
#[pyfunction]
fn eval_grid_row(coeffs: &PyCoefficients, grid: &PyGrid, k: usize) -> PyResult<Vec<Complex64>> {
    if k >= grid.0.nt() {
        return Err(PyValueError::new_err(format!("row {k} outside 0..{}", grid.0.nt())));
    }
    Ok(expsum::eval_grid(&coeffs.0, &grid.0).py()?.row(k))
}

#[pyfunction]
fn ramanujan_sum(q: u64, n: i64) -> PyResult<i64> {
    rationals::ramanujan_sum(q, n).py()
}

#[pyfunction]
fn mobius(q: u64) -> i8 {
    rationals::mobius(q)
}

#[pyfunction]
fn totient(q: u64) -> u64 {
    rationals::totient(q)
}

/// `(a, q)` with `q <= N` and `|t - a/q| <= 1/(qN)`.
#[pyfunction]
fn dirichlet_approx(t: f64, n: u64) -> PyResult<(i64, u64)> {
    let f = rationals::dirichlet_approx(t, n).py()?;
    Ok((f.num(), f.den()))
}

/// Reduced `a/q` in `[0, 1)` with `q` in `[Q, 2Q)`.
#[pyfunction]
fn arc_centres(q_scale: u64) -> Vec<(i64, u64)> {
    rationals::arc_centres(q_scale).iter().map(|f| (f.num(), f.den())).collect()
}

/// `(lambda, #_lambda, N^2 lambda^-4 ln N)` over the dyadic windows.
#[pyfunction]
#[pyo3(signature = (coeffs, grid = None))]
fn level_counts(coeffs: &PyCoefficients, grid: Option<&PyGrid>) -> PyResult<Vec<(f64, usize, f64)>> {
    let n = coeffs.0.n_max();
    let grid = match grid {
        Some(g) => g.0,
        None => expsum::TorusGrid::standard(n).py()?,
    };
    let stats = levelsets::strip_statistics(&coeffs.0, &grid).py()?;
    Ok(stats
        .counts()
        .into_iter()
        .map(|(l, c)| (l, c, levelsets::level_count_bound(n, l)))
        .collect())
}

fn family(n: usize, points: Vec<(usize, f64)>) -> PyResult<incidence::PointFamily> {
    let members: BTreeMap<usize, f64> = points.iter().copied().collect();
    if members.len() != points.len() {
        return Err(PyValueError::new_err("two points share a strip"));
    }
    incidence::PointFamily::new(n, members).py()
}

/// `M` random strips of `1..=N`, one uniform point in each, as `(j, t_j)`.
#[pyfunction]
fn random_points(n: usize, m: usize, seed: u64) -> PyResult<Vec<(usize, f64)>> {
    let f = incidence::PointFamily::random(n, m, seed).py()?;
    Ok(f.members().iter().map(|(&j, &t)| (j, t)).collect())
}

#[pyfunction]
fn sharpness_configuration(q: u64, m: usize, n: usize) -> PyResult<Vec<(usize, f64)>> {
    let f = incidence::sharpness_configuration(q, m, n).py()?;
    Ok(f.members().iter().map(|(&j, &t)| (j, t)).collect())
}

#[pyfunction]
#[pyo3(signature = (points, n, q_scale, tol_mult = 1.0))]
fn count_incidences(points: Vec<(usize, f64)>, n: usize, q_scale: u64, tol_mult: f64) -> PyResult<u64> {
    incidence::count_incidences(&family(n, points)?, q_scale, tol_mult).py()
}

/// Every incidence as `(i, j, a, q)`.
#[pyfunction]
#[pyo3(signature = (points, n, q_scale, tol_mult = 1.0))]
fn incidence_records(
    points: Vec<(usize, f64)>,
    n: usize,
    q_scale: u64,
    tol_mult: f64,
) -> PyResult<Vec<(usize, usize, i64, u64)>> {
    let recs = incidence::incidence_records(&family(n, points)?, q_scale, tol_mult).py()?;
    Ok(recs.into_iter().map(|r| (r.i, r.j, r.frac.num(), r.frac.den())).collect())
}

/// `|K(0, a/q)|` and friends: the kernel `sum_{n<=N} e(nx + n^2 t)`.
#[pyfunction]
fn kernel_eval(n: usize, points: Vec<(f64, f64)>) -> PyResult<Vec<Complex64>> {
    kernel::kernel_eval(n, &points).py()
}

/// Sup norms of the major-arc pieces and the minor-arc remainder.
#[pyfunction]
#[pyo3(signature = (n, cutoff = "desk", smoothness = "c2"))]
fn kernel_sup_report<'py>(py: Python<'py>, n: usize, cutoff: &str, smoothness: &str) -> PyResult<Bound<'py, PyAny>> {
    let grid = expsum::TorusGrid::standard(n).py()?;
    let bump = kernel::ArcBump::new(named("smoothness", smoothness)?);
    let dec = kernel::decompose(&grid, bump, named("cutoff", cutoff)?).py()?;
    to_dict(py, &kernel::sup_norm_report(&dec).py()?)
}

/// `int |G|^2 w / (sup_T w(T)^(1/2) R ||a||^2)` with its parts.
#[pyfunction]
#[pyo3(signature = (coeffs, weight, mode = "horizontal"))]
fn weighted_ratio<'py>(
    py: Python<'py>,
    coeffs: &PyCoefficients,
    weight: &PyWeight,
    mode: &str,
) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &weights::weighted_ratio(&coeffs.0, &weight.0, named("tube mode", mode)?).py()?)
}

#[pyfunction]
#[pyo3(signature = (weight, mode = "horizontal"))]
fn tube_sup<'py>(py: Python<'py>, weight: &PyWeight, mode: &str) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &weights::tube_sup(&weight.0, named("tube mode", mode)?).py()?)
}

#[pyfunction]
fn is_one_dimensional<'py>(py: Python<'py>, weight: &PyWeight) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &weights::is_one_dimensional(&weight.0).py()?)
}

/// The convex lattice curve for parameter `k`, as `{N, R, values, ...}`.
#[pyfunction]
fn jarnik_curve<'py>(py: Python<'py>, k: u64) -> PyResult<Bound<'py, PyAny>> {
    let t = counterexamples::jarnik_curve(k).py()?;
    let d = PyDict::new(py);
    d.set_item("N", t.n_max)?;
    d.set_item("R", t.r_scale())?;
    d.set_item("support_size", t.support_size())?;
    d.set_item("convex", t.is_discretely_convex())?;
    d.set_item("values", t.values.iter().map(|(&n, &v)| (n, v)).collect::<Vec<_>>())?;
    Ok(d.into_any())
}

#[pyfunction]
fn counterexample_ratio<'py>(py: Python<'py>, k: u64) -> PyResult<Bound<'py, PyAny>> {
    let t = counterexamples::jarnik_curve(k).py()?;
    to_dict(py, &counterexamples::counterexample_ratio(&t).py()?)
}

/// Least-squares slope of `ln ratio` against `ln R` for `(R, ratio)` pairs.
#[pyfunction]
fn exponent_fit(samples: Vec<(f64, f64)>) -> Option<f64> {
    counterexamples::exponent_fit(&samples)
}

#[pymodule]
fn pyweyllab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCoefficients>()?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyWeight>()?;
    m.add_function(wrap_pyfunction!(eval_direct, m)?)?;
    m.add_function(wrap_pyfunction!(eval_grid_row, m)?)?;
    m.add_function(wrap_pyfunction!(ramanujan_sum, m)?)?;
    m.add_function(wrap_pyfunction!(mobius, m)?)?;
    m.add_function(wrap_pyfunction!(totient, m)?)?;
    m.add_function(wrap_pyfunction!(dirichlet_approx, m)?)?;
    m.add_function(wrap_pyfunction!(arc_centres, m)?)?;
    m.add_function(wrap_pyfunction!(level_counts, m)?)?;
    m.add_function(wrap_pyfunction!(random_points, m)?)?;
    m.add_function(wrap_pyfunction!(sharpness_configuration, m)?)?;
    m.add_function(wrap_pyfunction!(count_incidences, m)?)?;
    m.add_function(wrap_pyfunction!(incidence_records, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_eval, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_sup_report, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(tube_sup, m)?)?;
    m.add_function(wrap_pyfunction!(is_one_dimensional, m)?)?;
    m.add_function(wrap_pyfunction!(jarnik_curve, m)?)?;
    m.add_function(wrap_pyfunction!(counterexample_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(exponent_fit, m)?)?;
    m.add("GENERATOR", expsum::GENERATOR)?;
    Ok(())
}
