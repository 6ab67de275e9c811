//! Python bindings for `spinbath-core`.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use spinbath_core::dynamics::{boson_population, scaled_time_grid, spin_population};
use spinbath_core::numerics::QuadratureSpec;
use spinbath_core::{self as core, BathKind, Error};

create_exception!(spinbath, NumericalError, PyRuntimeError, "A numerical routine failed to converge.");

fn to_py(err: Error) -> PyErr {
    let root = match &err {
        Error::Context { source, .. } => source.as_ref(),
        other => other,
    };
    match root {
        Error::InvalidParameter(_) | Error::Domain { .. } => PyValueError::new_err(err.to_string()),
        _ => NumericalError::new_err(err.to_string()),
    }
}

fn bath(name: &str) -> PyResult<BathKind> {
    name.parse().map_err(to_py)
}

fn spec(tol_abs: Option<f64>, tol_rel: Option<f64>) -> QuadratureSpec {
    let base = QuadratureSpec::series();
    let (a, r) = (tol_abs.unwrap_or(base.abs_tol), tol_rel.unwrap_or(base.rel_tol));
    base.with_tolerances(a, r)
}

/// Renormalized tunneling η and ηΔ for one parameter set.
#[pyclass(frozen, module = "spinbath")]
struct RenormalizedSystem {
    inner: core::RenormalizedSystem,
}

#[pymethods]
impl RenormalizedSystem {
    #[getter]
    fn bath(&self) -> String {
        self.inner.params.bath.to_string()
    }
    #[getter]
    fn delta(&self) -> f64 {
        self.inner.params.delta
    }
    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.params.alpha
    }
    #[getter]
    fn temperature(&self) -> f64 {
        self.inner.params.temperature
    }
    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta
    }
    #[getter]
    fn eta_delta(&self) -> f64 {
        self.inner.effective_tunneling
    }
    #[getter]
    fn localized(&self) -> bool {
        self.inner.localized
    }
    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    fn __repr__(&self) -> String {
        let p = &self.inner.params;
        format!(
            "RenormalizedSystem(bath='{}', delta={}, alpha={}, temperature={}, eta={})",
            p.bath, p.delta, p.alpha, p.temperature, self.inner.eta
        )
    }
}

#[pyclass(frozen, module = "spinbath", get_all)]
struct PoleData {
    omega0: f64,
    gamma: f64,
    exists: bool,
}

#[pymethods]
impl PoleData {
    fn __repr__(&self) -> String {
        format!("PoleData(omega0={}, gamma={}, exists={})", self.omega0, self.gamma, self.exists)
    }
}

/// Solve for η. `bath` is "spin" or "boson"; only the boson η depends on T.
#[pyfunction]
#[pyo3(signature = (delta, alpha, temperature = 0.0, bath = "spin", tol = 1e-12))]
fn solve_eta(
    py: Python<'_>,
    delta: f64,
    alpha: f64,
    temperature: f64,
    bath: &str,
    tol: f64,
) -> PyResult<RenormalizedSystem> {
    let params = core::ModelParams::new(self::bath(bath)?, delta, alpha, temperature).map_err(to_py)?;
    let inner = py.detach(|| core::solve(&params, tol)).map_err(to_py)?;
    Ok(RenormalizedSystem { inner })
}

/// Uniform times with ηΔ·t running over [0, span].
#[pyfunction]
#[pyo3(signature = (system, span = 20.0, points = 400))]
fn time_grid(system: &RenormalizedSystem, span: f64, points: usize) -> Vec<f64> {
    scaled_time_grid(system.inner.effective_tunneling, span, points)
}

/// P(t) from the full spectral integral, for either bath.
#[pyfunction]
#[pyo3(signature = (system, times, tol_abs = None, tol_rel = None))]
fn population_difference(
    py: Python<'_>,
    system: &RenormalizedSystem,
    times: Vec<f64>,
    tol_abs: Option<f64>,
    tol_rel: Option<f64>,
) -> PyResult<Vec<f64>> {
    let sys = system.inner;
    let spec = spec(tol_abs, tol_rel);
    py.detach(|| match sys.params.bath {
        BathKind::Spin => spin_population(&sys, spec)?.series(&times),
        BathKind::Boson => boson_population(&sys, spec)?.series(&times),
    })
    .map_err(to_py)
}

#[pyfunction]
fn pole_data(system: &RenormalizedSystem) -> PyResult<PoleData> {
    let p = core::pole_data(&system.inner).map_err(to_py)?;
    Ok(PoleData { omega0: p.omega0, gamma: p.gamma_wwa, exists: p.exists })
}

/// Single-pole approximation cos(ω₀t)e^{−γt}.
#[pyfunction]
fn wwa_population(system: &RenormalizedSystem, times: Vec<f64>) -> PyResult<Vec<f64>> {
    let pole = core::pole_data(&system.inner).map_err(to_py)?;
    times.iter().map(|&t| core::wwa_population(t, &pole).map_err(to_py)).collect()
}

#[pyfunction]
fn critical_coupling(py: Python<'_>, delta: f64) -> PyResult<f64> {
    py.detach(|| core::critical_coupling(delta)).map_err(to_py)
}

/// "coherent" or "incoherent".
#[pyfunction]
#[pyo3(signature = (delta, alpha, temperature = 0.0))]
fn classify_dynamics(delta: f64, alpha: f64, temperature: f64) -> PyResult<&'static str> {
    let point = core::classify_dynamics(delta, alpha, temperature).map_err(to_py)?;
    Ok(match point.classification {
        core::Classification::Coherent => "coherent",
        core::Classification::Incoherent => "incoherent",
    })
}

/// ⟨τx(t)⟩ for a spin-bath system.
#[pyfunction]
#[pyo3(signature = (system, times, temperature = 0.0))]
fn tau_x(py: Python<'_>, system: &RenormalizedSystem, times: Vec<f64>, temperature: f64) -> PyResult<Vec<f64>> {
    let sys = system.inner;
    py.detach(|| core::TauX::new(temperature, &sys)?.series(&times)).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (system, temperature = 0.0))]
fn tau_x_long_time(system: &RenormalizedSystem, temperature: f64) -> PyResult<f64> {
    Ok(core::TauX::new(temperature, &system.inner).map_err(to_py)?.long_time_limit())
}

/// Transformed density-matrix combinations as a dict of lists.
#[pyfunction]
#[pyo3(signature = (system, times, temperature = 0.0))]
fn coherence_elements<'py>(
    py: Python<'py>,
    system: &RenormalizedSystem,
    times: Vec<f64>,
    temperature: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let sys = system.inner;
    let rows = py
        .detach(|| core::dynamics::coherence_series(&times, temperature, &sys, &QuadratureSpec::series()))
        .map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("diag_diff", rows.iter().map(|r| r.diag_diff).collect::<Vec<_>>())?;
    out.set_item("offdiag_sum", rows.iter().map(|r| r.offdiag_sum).collect::<Vec<_>>())?;
    out.set_item("offdiag_diff", rows.iter().map(|r| r.offdiag_diff).collect::<Vec<_>>())?;
    out.set_item("trace", rows.iter().map(|r| r.trace).collect::<Vec<_>>())?;
    Ok(out)
}

fn shiba_dict<'py>(py: Python<'py>, r: &core::ShibaReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("delta", r.delta)?;
    d.set_item("alpha", r.alpha)?;
    d.set_item("eta", r.eta)?;
    d.set_item("chi0_half", r.chi0_half)?;
    d.set_item("c_over_j", r.c_over_j_limit)?;
    d.set_item("ratio", r.ratio)?;
    d.set_item("sum_rule", r.sum_rule)?;
    d.set_item("coherent", r.in_coherent_regime)?;
    Ok(d)
}

#[pyfunction]
fn shiba_check<'py>(py: Python<'py>, delta: f64, alpha: f64) -> PyResult<Bound<'py, PyDict>> {
    let r = py.detach(|| core::shiba_check(delta, alpha)).map_err(to_py)?;
    shiba_dict(py, &r)
}

/// The thirteen reference rows, recomputed.
#[pyfunction]
fn shiba_table<'py>(py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let rows = py.detach(core::shiba_table);
    rows.into_iter().map(|r| shiba_dict(py, &r.map_err(to_py)?)).collect()
}

/// NIBA P(t) on a uniform grid starting at 0.
#[pyfunction]
#[pyo3(signature = (times, delta, alpha, temperature = 0.0, bath = "spin", tol = 1e-4))]
fn niba_population(
    py: Python<'_>,
    times: Vec<f64>,
    delta: f64,
    alpha: f64,
    temperature: f64,
    bath: &str,
    tol: f64,
) -> PyResult<Vec<f64>> {
    let kernel = core::NibaKernel::new(self::bath(bath)?, alpha, temperature).map_err(to_py)?;
    let series = py.detach(|| core::niba_population(&times, delta, &kernel, tol)).map_err(to_py)?;
    Ok(series.values)
}

/// Coupling at which the NIBA P(t) stops oscillating.
#[pyfunction]
#[pyo3(signature = (delta, temperature = 0.0, bath = "spin"))]
fn niba_boundary(py: Python<'_>, delta: f64, temperature: f64, bath: &str) -> PyResult<f64> {
    let kind = self::bath(bath)?;
    py.detach(|| core::niba_boundary(kind, temperature, delta)).map_err(to_py)
}

#[pyfunction]
fn ground_state_energy(delta: f64, alpha: f64) -> PyResult<f64> {
    Ok(core::ground_state_energy(delta, alpha).map_err(to_py)?.value)
}

/// Runs every acceptance check. Returns (all_passed, report text).
#[pyfunction]
#[pyo3(signature = (tol_scale = 1.0, flip_gamma_sign = false))]
fn reproduce(py: Python<'_>, tol_scale: f64, flip_gamma_sign: bool) -> (bool, String) {
    let report = py.detach(|| core::reproduce_all(&core::ReproduceOptions { tol_scale, flip_gamma_sign }));
    (report.all_passed(), report.to_string())
}

#[pymodule]
fn spinbath(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<RenormalizedSystem>()?;
    m.add_class::<PoleData>()?;
    m.add_function(wrap_pyfunction!(solve_eta, m)?)?;
    m.add_function(wrap_pyfunction!(time_grid, m)?)?;
    m.add_function(wrap_pyfunction!(population_difference, m)?)?;
    m.add_function(wrap_pyfunction!(pole_data, m)?)?;
    m.add_function(wrap_pyfunction!(wwa_population, m)?)?;
    m.add_function(wrap_pyfunction!(critical_coupling, m)?)?;
    m.add_function(wrap_pyfunction!(classify_dynamics, m)?)?;
    m.add_function(wrap_pyfunction!(tau_x, m)?)?;
    m.add_function(wrap_pyfunction!(tau_x_long_time, m)?)?;
    m.add_function(wrap_pyfunction!(coherence_elements, m)?)?;
    m.add_function(wrap_pyfunction!(shiba_check, m)?)?;
    m.add_function(wrap_pyfunction!(shiba_table, m)?)?;
    m.add_function(wrap_pyfunction!(niba_population, m)?)?;
    m.add_function(wrap_pyfunction!(niba_boundary, m)?)?;
    m.add_function(wrap_pyfunction!(ground_state_energy, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce, m)?)?;
    Ok(())
}
