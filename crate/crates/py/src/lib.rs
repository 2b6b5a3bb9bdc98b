//! Python bindings: parameters, equilibrium and quenched two-site states,
//! correlation measures, factorization, ergodicity and sweeps.

use std::collections::HashMap;

use altxy::ed::{build_spin_hamiltonian, thermal_two_site, Boundary};
use altxy::factorization::separable_energy;
use altxy::measures::{discord, log_negativity, mutual_information, Measure};
use altxy::momentum::{gap_profile, ground_energy_per_site, spectrum, Grid, Size};
use altxy::observables::{protocol_observables, ObservableSet, Protocol, Quench};
use altxy::quench::{
    default_temperatures, ergodicity_score, nonmonotonicity_detect, QuenchSpec, TemperatureScan, Window,
};
use altxy::sweep::{parse_config, run};
use altxy::two_site::{assemble_rho, Source};
use altxy::{SystemParams, Temperature};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn temperature(beta: Option<f64>) -> PyResult<Temperature> {
    Temperature::from_beta(beta.unwrap_or(f64::INFINITY)).map_err(value_err)
}

fn size(n: Option<usize>, lattice: &str) -> PyResult<Size> {
    let grid = match lattice {
        "periodic" => Grid::Periodic,
        "antiperiodic" => Grid::Antiperiodic,
        "exact" => Grid::Exact,
        _ => return Err(PyValueError::new_err(format!("unknown lattice '{lattice}'"))),
    };
    match n {
        None => Ok(Size::Thermodynamic),
        Some(n) => Size::finite(n, grid).map_err(value_err),
    }
}

fn measure(label: &str) -> PyResult<Measure> {
    Measure::parse(label).ok_or_else(|| PyValueError::new_err(format!("unknown measure '{label}'")))
}

/// Couplings and dimensionless fields; J defaults to 1.
#[pyclass(name = "Params", frozen, from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: SystemParams,
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (gamma, lambda1, lambda2, j = 1.0))]
    fn new(gamma: f64, lambda1: f64, lambda2: f64, j: f64) -> PyResult<Self> {
        Ok(PyParams { inner: SystemParams::new(j, gamma, lambda1, lambda2).map_err(value_err)? })
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    #[getter]
    fn lambda1(&self) -> f64 {
        self.inner.lambda1
    }

    #[getter]
    fn lambda2(&self) -> f64 {
        self.inner.lambda2
    }

    #[getter]
    fn j(&self) -> f64 {
        self.inner.j
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!("Params(gamma={}, lambda1={}, lambda2={}, j={})", p.gamma, p.lambda1, p.lambda2, p.j)
    }

    /// Ground energy per site in the thermodynamic limit.
    fn ground_energy(&self) -> PyResult<f64> {
        ground_energy_per_site(&self.inner).map_err(value_err)
    }

    /// The 16 pair-Hamiltonian eigenvalues at momentum angle phi, ascending.
    fn spectrum(&self, phi: f64) -> PyResult<Vec<f64>> {
        spectrum(&self.inner, phi).map_err(value_err)
    }

    /// (smallest gap, angle where it occurs) over φ ∈ [0, π/2].
    fn gap(&self) -> PyResult<(f64, f64)> {
        let g = gap_profile(&self.inner).map_err(value_err)?;
        Ok((g.min_gap, g.argmin_phi))
    }

    /// Separable-ansatz energy, its lower bound and the angles.
    fn separable(&self) -> PyResult<HashMap<String, f64>> {
        let s = separable_energy(&self.inner).map_err(value_err)?;
        Ok(HashMap::from([
            ("epsilon".to_string(), s.epsilon),
            ("epsilon0".to_string(), s.epsilon0),
            ("theta_even".to_string(), s.theta_e),
            ("theta_odd".to_string(), s.theta_o),
        ]))
    }
}

/// Density matrix of a nearest-neighbour even–odd pair.
#[pyclass(name = "TwoSiteState", frozen)]
struct PyTwoSiteState {
    inner: altxy::two_site::TwoSiteState,
}

#[pymethods]
impl PyTwoSiteState {
    /// Equilibrium state; beta=None is the ground state, n=None the
    /// thermodynamic limit.
    #[staticmethod]
    #[pyo3(signature = (params, beta = None, n = None, lattice = "periodic"))]
    fn equilibrium(params: &PyParams, beta: Option<f64>, n: Option<usize>, lattice: &str) -> PyResult<Self> {
        let protocol = Protocol::equilibrium(temperature(beta)?);
        let obs = protocol_observables(&params.inner, &protocol, size(n, lattice)?).map_err(value_err)?;
        Ok(PyTwoSiteState { inner: assemble_rho(&obs, Source::Ces).map_err(value_err)? })
    }

    /// State at time t after switching both fields off.
    #[staticmethod]
    #[pyo3(signature = (params, t, beta = None, n = None, lattice = "periodic"))]
    fn quenched(params: &PyParams, t: f64, beta: Option<f64>, n: Option<usize>, lattice: &str) -> PyResult<Self> {
        let protocol = Protocol { temp: temperature(beta)?, quench: Some(Quench { post: params.inner.fields_off(), t }) };
        let obs = protocol_observables(&params.inner, &protocol, size(n, lattice)?).map_err(value_err)?;
        Ok(PyTwoSiteState { inner: assemble_rho(&obs, Source::Tes).map_err(value_err)? })
    }

    /// Reduced state of sites 0 and 1 from exact diagonalization of an
    /// N-site periodic spin chain (N ≤ 12).
    #[staticmethod]
    fn spin_chain(params: &PyParams, n: usize, beta: f64) -> PyResult<Self> {
        let h = build_spin_hamiltonian(&params.inner, n, Boundary::Periodic).map_err(value_err)?;
        let mut states = thermal_two_site(&h, beta, &[(0, 1)]).map_err(value_err)?;
        Ok(PyTwoSiteState { inner: states.remove(0) })
    }

    /// State from the seven observables (m_e, m_o, c_xx, c_yy, c_zz, c_xy, c_yx).
    #[staticmethod]
    fn from_observables(values: [f64; 7]) -> PyResult<Self> {
        let obs = ObservableSet::from_array(values);
        Ok(PyTwoSiteState { inner: assemble_rho(&obs, Source::Ces).map_err(value_err)? })
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        let m = &self.inner.rho;
        (0..4).map(|i| (0..4).map(|k| m[(i, k)]).collect()).collect()
    }

    fn observables(&self) -> [f64; 7] {
        self.inner.observables().to_array()
    }

    fn log_negativity(&self) -> PyResult<f64> {
        log_negativity(&self.inner).map_err(value_err)
    }

    fn discord(&self) -> PyResult<f64> {
        discord(&self.inner).map_err(value_err)
    }

    fn mutual_information(&self) -> PyResult<f64> {
        mutual_information(&self.inner).map_err(value_err)
    }
}

/// Ergodicity report for a quench from the given fields to zero fields.
#[pyfunction]
#[pyo3(signature = (params, measure_label, beta, window_start = None, window_end = None, samples = None))]
fn ergodicity(
    params: &PyParams,
    measure_label: &str,
    beta: f64,
    window_start: Option<f64>,
    window_end: Option<f64>,
    samples: Option<usize>,
) -> PyResult<HashMap<String, f64>> {
    let d = Window::default();
    let window = Window {
        start: window_start.unwrap_or(d.start),
        end: window_end.unwrap_or(d.end),
        samples: samples.unwrap_or(d.samples),
    };
    let spec = QuenchSpec::fields_off(params.inner, temperature(Some(beta))?);
    let r = ergodicity_score(&spec, measure(measure_label)?, window, TemperatureScan::default()).map_err(value_err)?;
    Ok(HashMap::from([
        ("time_average".to_string(), r.q_time_avg),
        ("equilibrium_max".to_string(), r.q_eq_max),
        ("argmax_t".to_string(), r.argmax_temperature),
        ("eta".to_string(), r.eta),
        ("fluctuation".to_string(), r.fluctuation),
    ]))
}

/// Whether the equilibrium measure ever rises with temperature on (0, t_max].
#[pyfunction]
#[pyo3(signature = (params, measure_label, points = 400, t_max = 2.0))]
fn nonmonotonic(params: &PyParams, measure_label: &str, points: usize, t_max: f64) -> PyResult<(bool, Option<(f64, f64)>)> {
    let r = nonmonotonicity_detect(&params.inner, measure(measure_label)?, &default_temperatures(points, t_max))
        .map_err(value_err)?;
    Ok((r.ng, r.witness))
}

/// Runs a sweep from configuration text; returns (files, rows, failed rows).
#[pyfunction]
fn sweep(config: &str) -> PyResult<(Vec<String>, usize, usize)> {
    let cfg = parse_config(config).map_err(value_err)?;
    let s = run(&cfg).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok((s.files.iter().map(|p| p.display().to_string()).collect(), s.rows, s.failed_rows))
}

#[pymodule]
#[pyo3(name = "altxy")]
fn altxy_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyTwoSiteState>()?;
    m.add_function(wrap_pyfunction!(ergodicity, m)?)?;
    m.add_function(wrap_pyfunction!(nonmonotonic, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}
