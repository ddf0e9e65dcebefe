//! Python bindings. Fields cross the boundary as nested lists (or anything
//! that converts to `list[list[float]]`, such as a 2-D numpy array) indexed
//! `[i][j]` with x along the first axis.

use dispersia_core::boussinesq::{compatibility_order_test, random_profile, soliton_profile, CompatConfig};
use dispersia_core::evolve::{run, EvolutionConfig};
use dispersia_core::table::{reproduce, TableInputs};
use dispersia_core::{elliptic, CaseId, EquationId, Error, Field2D, GardnerForm, Grid2D, PhysicalParams, SolutionFamily, SolutionKind, WaveEquation};
use ndarray::Array2;
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;
use serde_json::Value;

fn py_err(e: Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else if e.is_io() {
        PyOSError::new_err(e.to_string())
    } else {
        PyArithmeticError::new_err(e.to_string())
    }
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_bound_py_any(py)?,
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_bound_py_any(py)?,
            None => n.as_f64().unwrap_or(f64::NAN).into_bound_py_any(py)?,
        },
        Value::String(s) => s.into_bound_py_any(py)?,
        Value::Array(a) => PyList::new(py, a.iter().map(|x| to_py(py, x)).collect::<PyResult<Vec<_>>>()?)?.into_any(),
        Value::Object(o) => {
            let d = PyDict::new(py);
            for (k, x) in o {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn serialize<'py, T: serde::Serialize>(py: Python<'py>, t: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(t).map_err(|e| py_err(e.into()))?;
    to_py(py, &v)
}

fn params(alpha: f64, beta: f64, gamma: f64, delta: f64, tau: f64) -> PyResult<PhysicalParams> {
    PhysicalParams::new(alpha, beta, gamma, delta, tau).map_err(py_err)
}

fn field_from(rows: Vec<Vec<f64>>, length_x: f64, length_y: f64) -> PyResult<Field2D> {
    let nx = rows.len();
    let ny = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ny) {
        return Err(PyValueError::new_err("field rows have different lengths"));
    }
    let grid = Grid2D::new(nx, ny, length_x, length_y).map_err(py_err)?;
    let values = Array2::from_shape_vec((nx, ny), rows.into_iter().flatten().collect()).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Field2D::from_values(grid, values).map_err(py_err)
}

fn field_to(f: &Field2D) -> Vec<Vec<f64>> {
    f.values.outer_iter().map(|r| r.to_vec()).collect()
}

/// Complete elliptic integrals (K(m), E(m)) with m the parameter (k²).
#[pyfunction]
fn ellipke(m: f64) -> PyResult<(f64, f64)> {
    elliptic::ellip_ke(m).map_err(py_err)
}

/// Jacobi (sn, cn, dn) of u at parameter m.
#[pyfunction]
fn jacobi(u: f64, m: f64) -> PyResult<(f64, f64, f64)> {
    let j = elliptic::jacobi(u, m).map_err(py_err)?;
    Ok((j.sn, j.cn, j.dn))
}

/// An exact traveling wave.
#[pyclass(name = "Solution", frozen)]
struct PySolution {
    inner: SolutionFamily,
}

#[pymethods]
impl PySolution {
    #[new]
    #[pyo3(signature = (family, k=1.0, l=0.5, m=None, lam=None, alpha=0.15, beta=0.1, gamma=0.05, delta=0.0, tau=0.0))]
    #[allow(clippy::too_many_arguments)]
    fn new(family: &str, k: f64, l: f64, m: Option<f64>, lam: Option<f64>, alpha: f64, beta: f64, gamma: f64, delta: f64, tau: f64) -> PyResult<Self> {
        let kind = SolutionKind::parse(family).map_err(py_err)?;
        let m = match (kind.is_soliton(), m) {
            (true, _) => 1.0,
            (false, Some(m)) => m,
            (false, None) => return Err(PyValueError::new_err(format!("{family} needs m"))),
        };
        let p = params(alpha, beta, gamma, delta, tau)?;
        Ok(PySolution { inner: SolutionFamily::build(kind, k, l, m, p, lam).map_err(py_err)? })
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.inner.wave.omega
    }

    #[getter]
    fn amplitude(&self) -> f64 {
        self.inner.dense_amplitude()
    }

    #[getter]
    fn speed(&self) -> f64 {
        self.inner.wave_metrics().speed
    }

    #[getter]
    fn period(&self) -> Option<f64> {
        self.inner.period()
    }

    fn profile(&self, xi: f64) -> f64 {
        self.inner.profile(xi)
    }

    fn evaluate(&self, x: f64, y: f64, t: f64) -> f64 {
        self.inner.evaluate(x, y, t)
    }

    /// Samples u(x, y, t) on an nx × ny periodic grid.
    #[pyo3(signature = (nx, ny, length_x, length_y, t=0.0))]
    fn sample(&self, nx: usize, ny: usize, length_x: f64, length_y: f64, t: f64) -> PyResult<Vec<Vec<f64>>> {
        let g = Grid2D::new(nx, ny, length_x, length_y).map_err(py_err)?;
        Ok(field_to(&self.inner.sample(&g, t)))
    }

    fn metrics<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        serialize(py, &self.inner.wave_metrics())
    }

    /// Mean over one periodic cell; None for solitons.
    #[pyo3(signature = (n=256))]
    fn cell_mean(&self, n: usize) -> Option<f64> {
        self.inner.cell_mean(n)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        serialize(py, &self.inner.to_document())
    }

    fn __repr__(&self) -> String {
        format!("Solution({:?}, k={}, l={}, omega={})", self.inner.kind, self.inner.wave.k, self.inner.wave.l, self.inner.wave.omega)
    }
}

/// Reference amplitudes and speeds with PASS/FAIL per row.
#[pyfunction]
#[pyo3(signature = (tolerance=dispersia_core::table::DEFAULT_TOLERANCE))]
fn reproduce_table(py: Python<'_>, tolerance: f64) -> PyResult<Bound<'_, PyAny>> {
    let t = reproduce(&TableInputs { tolerance, ..TableInputs::default() }).map_err(py_err)?;
    serialize(py, &t)
}

fn equation(name: &str, p: PhysicalParams, lam: Option<f64>, cubic_gardner: bool) -> PyResult<WaveEquation> {
    let mut eq = WaveEquation::new(EquationId::parse(name).map_err(py_err)?, p);
    if let Some(l) = lam {
        eq = eq.with_lambda(l);
    }
    if cubic_gardner {
        eq = eq.with_gardner_form(GardnerForm::WithCubic);
    }
    Ok(eq)
}

/// Residual of `equation` for an exact wave, evaluated along ξ.
#[pyfunction]
#[pyo3(signature = (equation_name, solution, samples=2001, lam=None))]
fn residual_plane<'py>(py: Python<'py>, equation_name: &str, solution: &PySolution, samples: usize, lam: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    let eq = equation(equation_name, solution.inner.params, lam, false)?;
    serialize(py, &eq.residual_plane(&solution.inner, samples).map_err(py_err)?)
}

/// Pointwise residual statistics for gridded u and u_t on a periodic box.
#[pyfunction]
#[pyo3(signature = (equation_name, u, u_t, length_x, length_y, alpha=0.15, beta=0.1, gamma=0.05, lam=None, cubic_gardner=false))]
#[allow(clippy::too_many_arguments)]
fn residual_grid<'py>(
    py: Python<'py>,
    equation_name: &str,
    u: Vec<Vec<f64>>,
    u_t: Vec<Vec<f64>>,
    length_x: f64,
    length_y: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
    lam: Option<f64>,
    cubic_gardner: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let eq = equation(equation_name, params(alpha, beta, gamma, 0.0, 0.0)?, lam, cubic_gardner)?;
    let (u, u_t) = (field_from(u, length_x, length_y)?, field_from(u_t, length_x, length_y)?);
    serialize(py, &eq.residual_grid(&u, &u_t, None).map_err(py_err)?)
}

/// Zero-x-mean test field on a 4π × 4π box.
#[pyfunction]
#[pyo3(signature = (nx, ny, seed=42))]
fn random_field(nx: usize, ny: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    Ok(field_to(&random_profile(nx, ny, seed).map_err(py_err)?))
}

/// ε-sweep of the Boussinesq pair mismatch.
#[pyfunction]
#[pyo3(signature = (case, order=1, profile="random", seed=42, broken=vec![], epsilons=None, nx=128, ny=64))]
#[allow(clippy::too_many_arguments)]
fn compatibility<'py>(
    py: Python<'py>,
    case: &str,
    order: u32,
    profile: &str,
    seed: u64,
    broken: Vec<String>,
    epsilons: Option<Vec<f64>>,
    nx: usize,
    ny: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let mut cfg = CompatConfig::new(CaseId::parse(case).map_err(py_err)?, order);
    cfg.disabled = broken;
    if let Some(e) = epsilons {
        cfg.epsilons = e;
    }
    let u = match profile {
        "soliton" => soliton_profile(nx, ny),
        "random" => random_profile(nx, ny, seed),
        _ => return Err(PyValueError::new_err(format!("unknown profile '{profile}'"))),
    }
    .map_err(py_err)?;
    let report = py.detach(|| compatibility_order_test(&cfg, &u, profile, None)).map_err(py_err)?;
    serialize(py, &report)
}

/// Integrates from u0 to t_end; returns (u_final, summary).
#[pyfunction]
#[pyo3(signature = (equation_name, u0, length_x, length_y, t_end, dt=None, alpha=0.15, beta=0.1, gamma=0.05, tau=0.0, lam=None))]
#[allow(clippy::too_many_arguments)]
fn evolve<'py>(
    py: Python<'py>,
    equation_name: &str,
    u0: Vec<Vec<f64>>,
    length_x: f64,
    length_y: f64,
    t_end: f64,
    dt: Option<f64>,
    alpha: f64,
    beta: f64,
    gamma: f64,
    tau: f64,
    lam: Option<f64>,
) -> PyResult<(Vec<Vec<f64>>, Bound<'py, PyAny>)> {
    let p = params(alpha, beta, gamma, 0.0, tau)?;
    let u0 = field_from(u0, length_x, length_y)?;
    let mut cfg = EvolutionConfig::new(EquationId::parse(equation_name).map_err(py_err)?, 1.0, t_end);
    cfg.lambda = lam;
    cfg.dt = dt.unwrap_or_else(|| 0.5 / cfg.max_symbol(&u0.grid, &p));
    let traj = py.detach(|| run(&u0, &cfg, &p)).map_err(py_err)?;
    let summary = serde_json::json!({
        "steps": traj.steps,
        "dt_used": traj.dt_used,
        "mass_drift": traj.mass_drift(),
        "l2_drift": traj.l2_drift(),
    });
    Ok((field_to(traj.last()), to_py(py, &summary)?))
}

#[pymodule]
fn dispersia(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(ellipke, m)?)?;
    m.add_function(wrap_pyfunction!(jacobi, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce_table, m)?)?;
    m.add_function(wrap_pyfunction!(residual_plane, m)?)?;
    m.add_function(wrap_pyfunction!(residual_grid, m)?)?;
    m.add_function(wrap_pyfunction!(random_field, m)?)?;
    m.add_function(wrap_pyfunction!(compatibility, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    Ok(())
}
