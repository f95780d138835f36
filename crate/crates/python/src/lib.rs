//! Python bindings: wall/ensemble parameters, the closed-form results, and
//! the samplers. Spectra come back as plain lists of floats.

use pyo3::exceptions::{PyNotImplementedError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use schmidt_ldp::sampler::{self as smp, seeded_rng, ChainConfig};
use schmidt_ldp::{analytics, density, ensemble, Error, WallSide};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Unsupported(_) => PyNotImplementedError::new_err(e.to_string()),
        Error::Quadrature { .. } | Error::NotHermitian(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(name = "EnsembleParams", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
pub struct PyEnsembleParams(schmidt_ldp::EnsembleParams);

#[pymethods]
impl PyEnsembleParams {
    #[new]
    #[pyo3(signature = (n, m = None, beta = 2.0))]
    fn new(n: usize, m: Option<usize>, beta: f64) -> PyResult<Self> {
        schmidt_ldp::EnsembleParams::new(n, m.unwrap_or(n), beta).map(Self).map_err(py_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.m
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.0.beta
    }

    fn __repr__(&self) -> String {
        format!("EnsembleParams(n={}, m={}, beta={})", self.0.n, self.0.m, self.0.beta)
    }
}

#[pyclass(name = "BarrierSpec", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
pub struct PyBarrierSpec(schmidt_ldp::BarrierSpec);

#[pymethods]
impl PyBarrierSpec {
    /// `side` is "min", "max" or "none".
    #[new]
    #[pyo3(signature = (side, zeta = 0.0))]
    fn new(side: &str, zeta: f64) -> PyResult<Self> {
        let side = match side {
            "min" => WallSide::Min,
            "max" => WallSide::Max,
            "none" => WallSide::None,
            other => return Err(PyValueError::new_err(format!("unknown wall side {other:?}"))),
        };
        let b = if side == WallSide::None {
            schmidt_ldp::BarrierSpec::none()
        } else {
            schmidt_ldp::BarrierSpec::new(side, zeta).map_err(py_err)?
        };
        Ok(Self(b))
    }

    #[staticmethod]
    fn min_wall(zeta: f64) -> PyResult<Self> {
        schmidt_ldp::BarrierSpec::min_wall(zeta).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn max_wall(zeta: f64) -> PyResult<Self> {
        schmidt_ldp::BarrierSpec::max_wall(zeta).map(Self).map_err(py_err)
    }

    #[getter]
    fn side(&self) -> &'static str {
        match self.0.side {
            WallSide::Min => "min",
            WallSide::Max => "max",
            WallSide::None => "none",
        }
    }

    #[getter]
    fn zeta(&self) -> f64 {
        self.0.zeta
    }

    fn __repr__(&self) -> String {
        format!("BarrierSpec({:?}, zeta={})", self.side(), self.0.zeta)
    }
}

#[pyfunction]
fn rate_function(barrier: &PyBarrierSpec) -> PyResult<f64> {
    analytics::rate_function(&barrier.0).map_err(py_err)
}

#[pyfunction]
fn tail_log_probability(params: &PyEnsembleParams, barrier: &PyBarrierSpec) -> PyResult<f64> {
    analytics::tail_log_probability(&params.0, &barrier.0).map_err(py_err)
}

#[pyfunction]
fn avg_entropy(barrier: &PyBarrierSpec, n: usize) -> PyResult<f64> {
    analytics::avg_entropy(&barrier.0, n).map_err(py_err)
}

#[pyfunction]
fn model_radius(barrier: &PyBarrierSpec) -> PyResult<f64> {
    analytics::model_radius(&barrier.0).map_err(py_err)
}

#[pyfunction]
fn model_log_negativity(radius: f64) -> f64 {
    analytics::model_log_negativity(radius)
}

#[pyfunction]
fn matching_zeta(zeta1: f64) -> PyResult<f64> {
    analytics::matching_zeta(zeta1).map_err(py_err)
}

#[pyfunction]
fn transition_points() -> (f64, f64) {
    analytics::transition_points()
}

/// Equilibrium density of the rescaled eigenvalues, evaluated at `xs`.
#[pyfunction]
fn equilibrium_density(barrier: &PyBarrierSpec, xs: Vec<f64>) -> PyResult<Vec<f64>> {
    let law = density::DensityLaw::equilibrium(barrier.0).map_err(py_err)?;
    Ok(xs.into_iter().map(|x| law.density(x)).collect())
}

#[pyfunction]
fn semicircle_density(x: f64, radius: f64) -> f64 {
    density::semicircle_density(x, radius)
}

/// Metropolis spectra plus a dict of chain diagnostics.
#[pyfunction]
#[pyo3(signature = (params, barrier, steps, burn_in, thin = 1, seed = 0))]
fn mcmc_sample(
    py: Python<'_>,
    params: &PyEnsembleParams,
    barrier: &PyBarrierSpec,
    steps: usize,
    burn_in: usize,
    thin: usize,
    seed: u64,
) -> PyResult<(Vec<Vec<f64>>, Py<pyo3::types::PyDict>)> {
    let cfg = ChainConfig::new(steps, burn_in, thin, seed).map_err(py_err)?;
    let (p, b) = (params.0, barrier.0);
    let (spectra, diag) = py.detach(|| smp::mcmc_sample(&p, &b, &cfg)).map_err(py_err)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("acceptance_rate", diag.acceptance_rate)?;
    d.set_item("autocorrelation_time", diag.autocorrelation_time)?;
    d.set_item("n_kept", diag.n_kept)?;
    d.set_item("step_width", diag.step_width)?;
    d.set_item("acceptance_warning", diag.acceptance_warning)?;
    Ok((spectra.into_iter().map(|s| s.values().to_vec()).collect(), d.unbind()))
}

#[pyfunction]
#[pyo3(signature = (params, seed = 0))]
fn direct_pure_state_spectrum(params: &PyEnsembleParams, seed: u64) -> PyResult<Vec<f64>> {
    let mut rng = seeded_rng(seed, 0);
    smp::direct_pure_state_spectrum(&params.0, &mut rng).map(|s| s.values().to_vec()).map_err(py_err)
}

/// `(zeta, p, stderr)` triples for `P(Nλ_min > ζ)` from shared exact draws.
#[pyfunction]
#[pyo3(signature = (params, zetas, draws, seed = 0))]
fn estimate_tail(
    py: Python<'_>,
    params: &PyEnsembleParams,
    zetas: Vec<f64>,
    draws: usize,
    seed: u64,
) -> PyResult<Vec<(f64, f64, f64)>> {
    let p = params.0;
    let est = py
        .detach(|| smp::estimate_tail_curve(&p, &zetas, draws, &mut seeded_rng(seed, 0)))
        .map_err(py_err)?;
    Ok(est.into_iter().map(|e| (e.zeta, e.p, e.stderr)).collect())
}

/// Mean log negativity and its standard error over `n_matrices` states.
#[pyfunction]
#[pyo3(signature = (params, n1, n2, barrier, n_matrices, burn_in = 3000, thin = 20, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn average_negativity(
    py: Python<'_>,
    params: &PyEnsembleParams,
    n1: usize,
    n2: usize,
    barrier: &PyBarrierSpec,
    n_matrices: usize,
    burn_in: usize,
    thin: usize,
    seed: u64,
) -> PyResult<(f64, f64)> {
    let parts = ensemble::Bipartition::new(n1, n2).map_err(py_err)?;
    let cfg = ChainConfig { steps: burn_in + 1, burn_in, step_width: 1e-3, thin, seed };
    let (p, b) = (params.0, barrier.0);
    let est = py.detach(|| ensemble::average_negativity(&p, &parts, &b, n_matrices, &cfg)).map_err(py_err)?;
    Ok((est.mean, est.stderr))
}

#[pymodule]
#[pyo3(name = "schmidt_ldp")]
fn schmidt_ldp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEnsembleParams>()?;
    m.add_class::<PyBarrierSpec>()?;
    m.add_function(wrap_pyfunction!(rate_function, m)?)?;
    m.add_function(wrap_pyfunction!(tail_log_probability, m)?)?;
    m.add_function(wrap_pyfunction!(avg_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(model_radius, m)?)?;
    m.add_function(wrap_pyfunction!(model_log_negativity, m)?)?;
    m.add_function(wrap_pyfunction!(matching_zeta, m)?)?;
    m.add_function(wrap_pyfunction!(transition_points, m)?)?;
    m.add_function(wrap_pyfunction!(equilibrium_density, m)?)?;
    m.add_function(wrap_pyfunction!(semicircle_density, m)?)?;
    m.add_function(wrap_pyfunction!(mcmc_sample, m)?)?;
    m.add_function(wrap_pyfunction!(direct_pure_state_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_tail, m)?)?;
    m.add_function(wrap_pyfunction!(average_negativity, m)?)?;
    Ok(())
}
