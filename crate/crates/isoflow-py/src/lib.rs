//! Python bindings. Results come back as plain dicts and lists; potentials
//! are passed as the same JSON documents the CLI reads.

use isoflow::curves::SampledCurve;
use isoflow::twowell::{self, MinimizeOptions, TwoWellProblem};
use isoflow::{onewell, series, wave, PotentialConfig, Vec2, WellData};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

fn to_py_err(e: isoflow::Error) -> PyErr {
    use isoflow::Error as E;
    match e {
        E::Config(_) | E::Precondition(_) | E::EmptyCurve(_) | E::Io(_) | E::Csv(_) => PyValueError::new_err(e.to_string()),
        _ => PyArithmeticError::new_err(e.to_string()),
    }
}

fn value_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) if !n.is_f64() => i.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(value_to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, value_to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    value_to_py(py, &v)
}

fn points(curve: &SampledCurve) -> Vec<(f64, f64)> {
    curve.points().iter().map(|p| (p.x, p.y)).collect()
}

fn potential(config: &str) -> PyResult<isoflow::Potential> {
    PotentialConfig::from_json(config).and_then(|c| c.build()).map_err(to_py_err)
}

fn curve_from(pts: Vec<(f64, f64)>) -> PyResult<SampledCurve> {
    SampledCurve::from_points(pts.into_iter().map(|(x, y)| Vec2::new(x, y)).collect()).map_err(to_py_err)
}

/// Area-constrained geodesic into a quadratic well at the origin with
/// `W = lambda1^2 x^2 + lambda2^2 y^2`.
#[pyfunction]
#[pyo3(signature = (lambda1, lambda2, p0, area, nodes = onewell::DEFAULT_NODES))]
fn onewell_isoperimetric<'py>(py: Python<'py>, lambda1: f64, lambda2: f64, p0: (f64, f64), area: f64, nodes: usize) -> PyResult<Bound<'py, PyAny>> {
    let well = WellData::axis_aligned(lambda1 * lambda1, lambda2 * lambda2).map_err(to_py_err)?;
    let sol = onewell::isoperimetric(&well, Vec2::new(p0.0, p0.1), area, nodes, None).map_err(to_py_err)?;
    let out = to_dict(py, &sol)?;
    out.set_item("energy", sol.energy())?;
    out.set_item("momentum", sol.momentum())?;
    out.set_item("points", points(&sol.curve))?;
    Ok(out)
}

/// Eigenvalues of the well flow at calibration angle `beta` and the spiral flag.
#[pyfunction]
fn approach_spectrum<'py>(py: Python<'py>, lambda1: f64, lambda2: f64, beta: f64) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &onewell::approach_spectrum(lambda1, lambda2, beta))
}

/// Energy of the `j`-circle competitor for `F = |p|^q` with momentum `area`.
#[pyfunction]
fn nonexistence_energy(q: f64, area: f64, j: usize) -> PyResult<f64> {
    onewell::nonexistence_sequence(q, area, j).map(|(_, e)| e).map_err(to_py_err)
}

/// Series coefficients `{degree: [c_0, ..., c_n]}` where `c_k` multiplies `x^(n-k) y^k`.
#[pyfunction]
#[pyo3(signature = (potential_json, beta, well = 0, degree = series::DEFAULT_MAX_DEGREE))]
fn gbeta_series<'py>(py: Python<'py>, potential_json: &str, beta: f64, well: usize, degree: usize) -> PyResult<Bound<'py, PyAny>> {
    let pot = potential(potential_json)?;
    let g = series::gbeta_for_well(&pot, well, beta, degree).map_err(to_py_err)?;
    let table = PyDict::new(py);
    for t in &g.terms {
        table.set_item(t.degree, t.coeffs.clone())?;
    }
    Ok(table.into_any())
}

/// Two-well minimizer with momentum `area`.
#[pyfunction]
#[pyo3(signature = (potential_json, area, nodes = twowell::DEFAULT_NODES))]
fn twowell_minimize<'py>(py: Python<'py>, potential_json: &str, area: f64, nodes: usize) -> PyResult<Bound<'py, PyAny>> {
    let pot = potential(potential_json)?;
    let problem = TwoWellProblem::new(pot, area, nodes, MinimizeOptions::default()).map_err(to_py_err)?;
    let r = py.detach(|| twowell::minimize(&problem, None)).map_err(to_py_err)?;
    let out = to_dict(py, &r)?;
    out.set_item("points", points(&r.curve))?;
    Ok(out)
}

/// Traveling-wave profile of a two-well curve: fitted speed, `H` and residuals.
#[pyfunction]
fn wave_profile<'py>(py: Python<'py>, curve: Vec<(f64, f64)>, potential_json: &str) -> PyResult<Bound<'py, PyAny>> {
    let pot = potential(potential_json)?;
    let c = curve_from(curve)?;
    let profile = wave::to_profile(&c, &pot).map_err(to_py_err)?;
    let out = to_dict(py, &profile)?;
    out.set_item("y", profile.y_grid.clone())?;
    out.set_item("u", profile.u.iter().map(|p| (p.x, p.y)).collect::<Vec<_>>())?;
    Ok(out)
}

/// Regime and eigenvalues of the traveling-wave linearization at a well.
#[pyfunction]
fn speed_spectrum<'py>(py: Python<'py>, lambda1: f64, lambda2: f64, nu: f64) -> PyResult<Bound<'py, PyAny>> {
    let s = wave::spectrum_for_rates(lambda1, lambda2, nu).map_err(to_py_err)?;
    let out = to_dict(py, &s)?;
    out.set_item("regime", s.regime.as_str())?;
    Ok(out)
}

#[pymodule]
fn isoflow_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(onewell_isoperimetric, m)?)?;
    m.add_function(wrap_pyfunction!(approach_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(nonexistence_energy, m)?)?;
    m.add_function(wrap_pyfunction!(gbeta_series, m)?)?;
    m.add_function(wrap_pyfunction!(twowell_minimize, m)?)?;
    m.add_function(wrap_pyfunction!(wave_profile, m)?)?;
    m.add_function(wrap_pyfunction!(speed_spectrum, m)?)?;
    Ok(())
}
