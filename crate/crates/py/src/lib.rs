//! Python bindings: the coefficient model, nonlinearity, periodic grid with
//! its spectral calculus, the Gaussian profiles, the Hardy check, rate
//! fitting, and the end-to-end simulation pipeline.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use beamlab::analysis;
use beamlab::coefficients::CoefficientModel;
use beamlab::config::RunConfig;
use beamlab::error::Error;
use beamlab::grid::{Field, Grid};
use beamlab::nonlinearity::{NonlinearityModel, TildeForm};
use beamlab::scaling;

fn to_py_err(err: Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

/// Power-law coefficient pair a(t) = (1+t)^alpha, b(t) = (1+t)^beta.
#[pyclass(name = "CoefficientModel")]
struct PyCoefficientModel {
    inner: CoefficientModel,
}

#[pymethods]
impl PyCoefficientModel {
    #[new]
    fn new(alpha: f64, beta: f64) -> PyResult<Self> {
        Ok(Self {
            inner: CoefficientModel::power_law(alpha, beta).map_err(to_py_err)?,
        })
    }

    /// (a, b, a', b') at time t.
    fn eval(&self, t: f64) -> PyResult<(f64, f64, f64, f64)> {
        let v = self.inner.eval(t).map_err(to_py_err)?;
        Ok((v.a, v.b, v.a_prime, v.b_prime))
    }

    /// (r, r') with r = a/b.
    fn ratio(&self, t: f64) -> PyResult<(f64, f64)> {
        let v = self.inner.ratio(t).map_err(to_py_err)?;
        Ok((v.r, v.r_prime))
    }

    fn big_r(&self, t: f64) -> PyResult<f64> {
        self.inner.big_r(t).map_err(to_py_err)
    }

    fn big_r_inverse(&self, rho: f64) -> PyResult<f64> {
        self.inner.big_r_inverse(rho).map_err(to_py_err)
    }

    fn region(&self) -> String {
        self.inner.region().to_string()
    }
}

/// N(z) = mu z^2 + optional |z|^{p-1} z with p >= 3.
#[pyclass(name = "Nonlinearity")]
struct PyNonlinearity {
    inner: NonlinearityModel,
}

#[pymethods]
impl PyNonlinearity {
    #[new]
    #[pyo3(signature = (mu, p = 3.0, power_law = false))]
    fn new(mu: f64, p: f64, power_law: bool) -> PyResult<Self> {
        let tilde = if power_law {
            TildeForm::PowerLaw
        } else {
            TildeForm::None
        };
        Ok(Self {
            inner: NonlinearityModel::new(mu, p, tilde).map_err(to_py_err)?,
        })
    }

    /// N^{(order)}(z) for order in 0..=2.
    fn eval(&self, z: f64, order: u32) -> PyResult<f64> {
        self.inner.eval(z, order).map_err(to_py_err)
    }
}

/// Periodic grid on [-L, L) with spectral differentiation and quadrature.
#[pyclass(name = "Grid")]
struct PyGrid {
    inner: Grid,
}

impl PyGrid {
    fn field(&self, values: Vec<f64>) -> PyResult<Field> {
        Field::new(self.inner.clone(), values).map_err(to_py_err)
    }
}

#[pymethods]
impl PyGrid {
    #[new]
    fn new(half_width: f64, n: usize) -> PyResult<Self> {
        Ok(Self {
            inner: Grid::new(half_width, n).map_err(to_py_err)?,
        })
    }

    fn points(&self) -> Vec<f64> {
        self.inner.points().to_vec()
    }

    fn spacing(&self) -> f64 {
        self.inner.spacing()
    }

    fn deriv(&self, values: Vec<f64>, order: u32) -> PyResult<Vec<f64>> {
        Ok(self
            .field(values)?
            .deriv(order)
            .map_err(to_py_err)?
            .into_values())
    }

    fn antideriv_zero_mean(&self, values: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self
            .field(values)?
            .antideriv_zero_mean()
            .map_err(to_py_err)?
            .into_values())
    }

    fn integral(&self, values: Vec<f64>) -> PyResult<f64> {
        Ok(self.field(values)?.integral())
    }

    fn moment(&self, values: Vec<f64>, power: u32) -> PyResult<f64> {
        self.field(values)?.moment(power).map_err(to_py_err)
    }

    fn weighted_norm(&self, values: Vec<f64>, k: u32, m: f64) -> PyResult<f64> {
        self.field(values)?.weighted_norm(k, m).map_err(to_py_err)
    }

    /// Gaussian profile phi = G(1, .) sampled on this grid.
    fn profile_phi(&self) -> Vec<f64> {
        scaling::profile_phi(&self.inner).into_values()
    }

    /// psi = phi'' sampled on this grid.
    fn profile_psi(&self) -> Vec<f64> {
        scaling::profile_psi(&self.inner).into_values()
    }

    /// Hardy check of a mean-zero field: (lhs, rhs, ratio).
    fn hardy_check(&self, values: Vec<f64>) -> PyResult<(f64, f64, f64)> {
        let check = analysis::hardy_check(&self.field(values)?).map_err(to_py_err)?;
        Ok((check.lhs, check.rhs, check.ratio))
    }
}

/// Classify a coefficient-exponent pair into the five-region atlas.
#[pyfunction]
fn classify_region(alpha: f64, beta: f64) -> String {
    beamlab::coefficients::classify_region(alpha, beta).to_string()
}

/// (delta, lambda_max, supercriticality exponent) for effective-damping
/// points; raises ValueError elsewhere.
#[pyfunction]
fn exponent_constants(alpha: f64, beta: f64) -> PyResult<(f64, f64, f64)> {
    let e = beamlab::coefficients::exponent_constants(alpha, beta).map_err(to_py_err)?;
    Ok((e.delta, e.lambda_max, e.supercriticality_exponent))
}

/// Least-squares decay-rate fit of (s, err) pairs over a window.
#[pyfunction]
fn fit_decay_rate(
    py: Python<'_>,
    s: Vec<f64>,
    err: Vec<f64>,
    lo: f64,
    hi: f64,
) -> PyResult<Py<PyDict>> {
    if s.len() != err.len() {
        return Err(PyValueError::new_err("s and err must have equal length"));
    }
    let series: Vec<(f64, f64)> = s.into_iter().zip(err).collect();
    let fit = analysis::fit_decay_rate(&series, (lo, hi)).map_err(to_py_err)?;
    let out = PyDict::new(py);
    out.set_item("slope", fit.slope)?;
    out.set_item("intercept", fit.intercept)?;
    out.set_item("r_squared", fit.r_squared)?;
    out.set_item("sample_count", fit.sample_count)?;
    Ok(out.into())
}

/// Run the full pipeline from a TOML config file; returns the summary as a
/// dict (parsed from the same JSON the CLI writes).
#[pyfunction]
#[pyo3(signature = (config_path, force = false))]
fn simulate(py: Python<'_>, config_path: &str, force: bool) -> PyResult<Py<PyDict>> {
    let config = RunConfig::from_path(std::path::Path::new(config_path)).map_err(to_py_err)?;
    let artifacts = beamlab::pipeline::run_pipeline(&config, force).map_err(to_py_err)?;
    let json = serde_json::to_string(&artifacts.summary)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let loads = py.import("json")?.getattr("loads")?;
    let obj = loads.call1((json,))?;
    Ok(obj.cast_into::<PyDict>()?.unbind())
}

#[pymodule]
fn beamlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCoefficientModel>()?;
    m.add_class::<PyNonlinearity>()?;
    m.add_class::<PyGrid>()?;
    m.add_function(wrap_pyfunction!(classify_region, m)?)?;
    m.add_function(wrap_pyfunction!(exponent_constants, m)?)?;
    m.add_function(wrap_pyfunction!(fit_decay_rate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
