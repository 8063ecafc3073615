//! Python bindings for `opmetric`.
//!
//! Matrices cross the boundary as lists of rows of Python `complex` values.
//! Invalid input raises `ValueError`; numerical breakdown raises
//! `NumericalError`, a subclass of `ArithmeticError`.

use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use opmetric::ball::{self, BallPoint};
use opmetric::chk::{self, ClosedOperator};
use opmetric::convexity::{self, FiniteConfiguration};
use opmetric::linalg::{self, ComplexMatrix, C64 as Complex64};
use opmetric::{io, oracles, suite, Error};

create_exception!(pyopmetric, NumericalError, PyArithmeticError);

fn to_py(e: Error) -> PyErr {
    if e.is_numerical() {
        NumericalError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn matrix_from_rows(rows: Vec<Vec<Complex64>>) -> PyResult<ComplexMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n == 0 || m == 0 {
        return Err(PyValueError::new_err("matrix must have at least one row and one column"));
    }
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("rows have different lengths"));
    }
    let flat: Vec<Complex64> = rows.into_iter().flatten().collect();
    linalg::from_row_major(n, m, &flat).map_err(to_py)
}

fn rows_of(m: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// An operator `H -> K` stored as a `dim_k x dim_h` matrix.
#[pyclass(name = "Operator", module = "pyopmetric", frozen)]
struct PyOperator {
    inner: ClosedOperator,
}

#[pymethods]
impl PyOperator {
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let inner = ClosedOperator::new(matrix_from_rows(rows)?).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn zero(dim_h: usize, dim_k: usize) -> Self {
        Self { inner: ClosedOperator::zero(dim_h, dim_k) }
    }

    #[staticmethod]
    fn scalar(z: Complex64) -> Self {
        Self { inner: ClosedOperator::scalar(z) }
    }

    #[getter]
    fn dim_h(&self) -> usize {
        self.inner.dim_h()
    }

    #[getter]
    fn dim_k(&self) -> usize {
        self.inner.dim_k()
    }

    #[getter]
    fn rows(&self) -> Vec<Vec<Complex64>> {
        rows_of(self.inner.matrix())
    }

    fn __repr__(&self) -> String {
        format!("Operator(dim_h={}, dim_k={}, rows={:?})", self.dim_h(), self.dim_k(), self.rows())
    }
}

fn wrap(inner: ClosedOperator) -> PyOperator {
    PyOperator { inner }
}

fn unwrap_all(points: Vec<PyRef<'_, PyOperator>>) -> Vec<ClosedOperator> {
    points.iter().map(|p| p.inner.clone()).collect()
}

#[pyfunction]
fn distance(a: &PyOperator, b: &PyOperator) -> PyResult<f64> {
    chk::distance(&a.inner, &b.inner).map_err(to_py)
}

/// Bounded transform; returns the rows of a `dim_h x dim_k` ball point.
#[pyfunction]
fn hat(t: &PyOperator) -> PyResult<Vec<Vec<Complex64>>> {
    Ok(rows_of(chk::hat(&t.inner).map_err(to_py)?.matrix()))
}

#[pyfunction]
fn unhat(rows: Vec<Vec<Complex64>>) -> PyResult<PyOperator> {
    let a = BallPoint::new(matrix_from_rows(rows)?).map_err(to_py)?;
    chk::unhat(&a).map(wrap).map_err(to_py)
}

/// Kobayashi distance between two points of the open unit ball.
#[pyfunction]
fn kobayashi(x: Vec<Vec<Complex64>>, y: Vec<Vec<Complex64>>) -> PyResult<f64> {
    let x = BallPoint::new(matrix_from_rows(x)?).map_err(to_py)?;
    let y = BallPoint::new(matrix_from_rows(y)?).map_err(to_py)?;
    ball::kobayashi(&x, &y).map_err(to_py)
}

#[pyfunction]
fn midpoint(a: &PyOperator, b: &PyOperator) -> PyResult<PyOperator> {
    chk::midpoint(&a.inner, &b.inner).map(wrap).map_err(to_py)
}

#[pyfunction]
fn geodesic_point(a: &PyOperator, b: &PyOperator, t: f64) -> PyResult<PyOperator> {
    chk::geodesic_point(&a.inner, &b.inner, t).map(wrap).map_err(to_py)
}

#[pyfunction]
fn barycenter(points: Vec<PyRef<'_, PyOperator>>) -> PyResult<PyOperator> {
    chk::barycenter(&unwrap_all(points)).map(wrap).map_err(to_py)
}

/// Returns `(center, radius, iterations, converged)`.
#[pyfunction]
#[pyo3(signature = (points, tol = convexity::DEFAULT_CENTER_TOL, max_iter = convexity::DEFAULT_CENTER_MAX_ITER))]
fn chebyshev_center(
    points: Vec<PyRef<'_, PyOperator>>,
    tol: f64,
    max_iter: usize,
) -> PyResult<(PyOperator, f64, usize, bool)> {
    let config = FiniteConfiguration::new(unwrap_all(points)).map_err(to_py)?;
    let cc = convexity::chebyshev_center(&config, tol, max_iter).map_err(to_py)?;
    Ok((wrap(cc.center), cc.radius, cc.iterations, cc.converged))
}

#[pyfunction]
fn diameter(points: Vec<PyRef<'_, PyOperator>>) -> PyResult<f64> {
    let config = FiniteConfiguration::new(unwrap_all(points)).map_err(to_py)?;
    convexity::diameter(&config).map_err(to_py)
}

#[pyfunction]
fn scalar_distance(t: Complex64, s: Complex64) -> f64 {
    oracles::scalar_distance(t, s)
}

#[pyfunction]
fn diagonal_distance(t: Vec<Complex64>, s: Vec<Complex64>) -> PyResult<f64> {
    oracles::diagonal_distance(&t, &s).map_err(to_py)
}

/// Seeded random operator whose bounded transform has norm below `max_hat_norm`.
#[pyfunction]
#[pyo3(signature = (seed, dim_h, dim_k, max_hat_norm = 0.95))]
fn random_operator(seed: u64, dim_h: usize, dim_k: usize, max_hat_norm: f64) -> PyResult<PyOperator> {
    oracles::random_operator(seed, dim_h, dim_k, max_hat_norm).map(wrap).map_err(to_py)
}

#[pyfunction]
fn read_operator(path: std::path::PathBuf) -> PyResult<PyOperator> {
    io::read_operator(path).map(wrap).map_err(to_py)
}

#[pyfunction]
fn write_operator(path: std::path::PathBuf, op: &PyOperator) -> PyResult<()> {
    io::write_operator_file(&path, &op.inner).map_err(to_py)
}

/// Runs the seeded property suite; returns one `(suite, name, worst, tolerance, passed)` per property.
#[pyfunction]
#[pyo3(signature = (which = "all", samples = 20, seed = 7))]
fn check(py: Python<'_>, which: &str, samples: usize, seed: u64) -> PyResult<Vec<(String, String, f64, f64, bool)>> {
    let which: suite::Suite = which.parse().map_err(to_py)?;
    let outcomes = py.detach(|| suite::run(which, samples, seed));
    Ok(outcomes
        .into_iter()
        .map(|o| (o.suite.to_string(), o.name.to_string(), o.worst, o.tolerance, o.passed))
        .collect())
}

#[pymodule]
fn pyopmetric(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<PyOperator>()?;
    m.add_function(wrap_pyfunction!(distance, m)?)?;
    m.add_function(wrap_pyfunction!(hat, m)?)?;
    m.add_function(wrap_pyfunction!(unhat, m)?)?;
    m.add_function(wrap_pyfunction!(kobayashi, m)?)?;
    m.add_function(wrap_pyfunction!(midpoint, m)?)?;
    m.add_function(wrap_pyfunction!(geodesic_point, m)?)?;
    m.add_function(wrap_pyfunction!(barycenter, m)?)?;
    m.add_function(wrap_pyfunction!(chebyshev_center, m)?)?;
    m.add_function(wrap_pyfunction!(diameter, m)?)?;
    m.add_function(wrap_pyfunction!(scalar_distance, m)?)?;
    m.add_function(wrap_pyfunction!(diagonal_distance, m)?)?;
    m.add_function(wrap_pyfunction!(random_operator, m)?)?;
    m.add_function(wrap_pyfunction!(read_operator, m)?)?;
    m.add_function(wrap_pyfunction!(write_operator, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    Ok(())
}
