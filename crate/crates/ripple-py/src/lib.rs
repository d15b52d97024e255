//! Python bindings exposing the main types and operations: grids, fields,
//! white-noise sampling, multipliers, norm estimation and the fixed-point
//! solve.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ripple::fixed_point::{solve_fixed_point, FixedPointConfig};
use ripple::noise::{sample_white_noise as rs_sample, NoiseSample};
use ripple::norms;
use ripple::operators;
use ripple::spectral::{self, MaskSpec, MultiplierSpec, SpectralField, TorusGrid};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn mask_of(name: &str) -> PyResult<MaskSpec> {
    match name {
        "gaussian" => Ok(MaskSpec::gaussian()),
        "quartic" => Ok(MaskSpec::quartic()),
        other => Err(PyValueError::new_err(format!("unknown mask '{other}'"))),
    }
}

#[pyclass(name = "TorusGrid", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTorusGrid {
    inner: TorusGrid,
}

#[pymethods]
impl PyTorusGrid {
    #[new]
    fn new(n1: usize, n2: usize) -> PyResult<Self> {
        Ok(Self {
            inner: TorusGrid::new(n1, n2).map_err(err)?,
        })
    }

    #[getter]
    fn n1(&self) -> usize {
        self.inner.n1()
    }

    #[getter]
    fn n2(&self) -> usize {
        self.inner.n2()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("TorusGrid({}, {})", self.inner.n1(), self.inner.n2())
    }
}

#[pyclass(name = "Field", skip_from_py_object)]
#[derive(Clone)]
struct PyField {
    inner: SpectralField,
}

#[pymethods]
impl PyField {
    /// Builds a field from physical samples (row-major, x1 fastest).
    #[staticmethod]
    fn from_physical(grid: &PyTorusGrid, samples: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: SpectralField::from_physical(grid.inner, &samples).map_err(err)?,
        })
    }

    fn to_physical(&self) -> Vec<f64> {
        self.inner.to_physical()
    }

    #[getter]
    fn grid(&self) -> PyTorusGrid {
        PyTorusGrid {
            inner: self.inner.grid(),
        }
    }

    fn coeff(&self, j1: i64, j2: i64) -> (f64, f64) {
        let c = self.inner.coeff(j1, j2);
        (c.re, c.im)
    }

    fn sup_norm(&self) -> f64 {
        self.inner.sup_norm()
    }

    fn spectral_inf_norm(&self) -> f64 {
        self.inner.spectral_inf_norm()
    }

    fn spectral_energy(&self) -> f64 {
        self.inner.spectral_energy()
    }

    fn hermitian_residual(&self) -> f64 {
        self.inner.hermitian_residual()
    }

    fn mean(&self) -> f64 {
        self.inner.mean().re
    }

    fn scale(&self, c: f64) -> Self {
        Self {
            inner: self.inner.scale(c),
        }
    }

    fn add(&self, other: &PyField) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.add(&other.inner).map_err(err)?,
        })
    }

    fn sub(&self, other: &PyField) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.sub(&other.inner).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Field({}x{}, |.|_spec = {:.3e})",
            self.inner.grid().n1(),
            self.inner.grid().n2(),
            self.inner.spectral_inf_norm()
        )
    }
}

/// Deterministic white-noise realization for (grid, seed).
#[pyfunction]
fn sample_white_noise(grid: &PyTorusGrid, seed: u64) -> PyField {
    PyField {
        inner: rs_sample(grid.inner, seed).into_field(),
    }
}

/// Zeroes the k1 = 0 column (the projection P).
#[pyfunction]
fn project_p(field: &PyField) -> PyResult<PyField> {
    Ok(PyField {
        inner: spectral::apply_multiplier(&field.inner, &MultiplierSpec::projection_p())
            .map_err(err)?,
    })
}

#[pyfunction]
fn hilbert(field: &PyField) -> PyResult<PyField> {
    Ok(PyField {
        inner: spectral::apply_multiplier(&field.inner, &MultiplierSpec::hilbert_r())
            .map_err(err)?,
    })
}

#[pyfunction]
fn heat_convolve(field: &PyField, t: f64) -> PyResult<PyField> {
    Ok(PyField {
        inner: spectral::heat_convolve(&field.inner, t).map_err(err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (field, ell, mask = "gaussian"))]
fn mollify(field: &PyField, ell: f64, mask: &str) -> PyResult<PyField> {
    Ok(PyField {
        inner: spectral::mollify(&field.inner, ell, &mask_of(mask)?).map_err(err)?,
    })
}

#[pyfunction]
fn dealiased_product(f: &PyField, g: &PyField) -> PyResult<PyField> {
    Ok(PyField {
        inner: spectral::dealiased_product(&f.inner, &g.inner).map_err(err)?,
    })
}

/// Solves L v = P xi.
#[pyfunction]
fn solve_linear(xi: &PyField) -> PyField {
    PyField {
        inner: operators::solve_linear(&NoiseSample::from_field(xi.inner.clone(), 0)),
    }
}

/// F^l = P(v_l d2 R v_l) with the dealiased product.
#[pyfunction]
fn offline_product(v_ell: &PyField) -> PyResult<PyField> {
    Ok(PyField {
        inner: operators::offline_product(&v_ell.inner).map_err(err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (u, xi, sigma, ell, mask = "gaussian"))]
fn euler_lagrange_residual(
    u: &PyField,
    xi: &PyField,
    sigma: f64,
    ell: f64,
    mask: &str,
) -> PyResult<f64> {
    operators::euler_lagrange_residual(
        &u.inner,
        &NoiseSample::from_field(xi.inner.clone(), 0),
        sigma,
        ell,
        &mask_of(mask)?,
    )
    .map_err(err)
}

#[pyfunction]
fn energy(m: &PyField, xi: &PyField, sigma: f64) -> PyResult<f64> {
    operators::energy(
        &m.inner,
        &NoiseSample::from_field(xi.inner.clone(), 0),
        sigma,
    )
    .map_err(err)
}

/// Anisotropic distance |x1-y1|_per + |x2-y2|_per^{2/3}.
#[pyfunction]
fn cc_distance(x: (f64, f64), y: (f64, f64)) -> f64 {
    norms::cc_distance([x.0, x.1], [y.0, y.1])
}

/// Positive-exponent Hoelder seminorm; exhaustive pairs on small grids,
/// stratified sampling otherwise.
#[pyfunction]
#[pyo3(signature = (field, alpha, pairs = 100_000, seed = 0))]
fn holder_pos(field: &PyField, alpha: f64, pairs: usize, seed: u64) -> PyResult<f64> {
    let grid = field.inner.grid();
    let plan = if grid.n1() <= 32 && grid.n2() <= 32 {
        norms::PairPlan::Exhaustive
    } else {
        norms::PairPlan::Stratified { pairs, seed }
    };
    Ok(norms::holder_pos(&field.inner, alpha, plan).map_err(err)?.value)
}

/// Negative-exponent norm through the heat-semigroup characterization.
#[pyfunction]
fn holder_neg(field: &PyField, beta: f64) -> PyResult<f64> {
    let t_grid = norms::default_t_grid(field.inner.grid());
    Ok(norms::holder_neg_semigroup(&field.inner, beta, &t_grid)
        .map_err(err)?
        .value)
}

/// Runs the Picard iteration for one realization; returns a dict with the
/// diagnostics plus the fields w and u.
#[pyfunction]
#[pyo3(signature = (xi, sigma, ell, tol = 1e-10, max_iter = 400, mask = "gaussian"))]
fn fixed_point(
    py: Python<'_>,
    xi: &PyField,
    sigma: f64,
    ell: f64,
    tol: f64,
    max_iter: usize,
    mask: &str,
) -> PyResult<Py<PyDict>> {
    let mask = mask_of(mask)?;
    let state = operators::RippleState::assemble(
        NoiseSample::from_field(xi.inner.clone(), 0),
        sigma,
        ell,
        &mask,
    )
    .map_err(err)?;
    let cfg = FixedPointConfig {
        sigma,
        ell,
        tol,
        max_iter,
        epsilon: 0.05,
        compute_proxies: false,
    };
    let rep = solve_fixed_point(&state.f_ell, &state.v_ell, &cfg).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("converged", rep.converged)?;
    out.set_item("iterations", rep.iterations)?;
    out.set_item("fp_residual", rep.fp_residual)?;
    out.set_item("el_residual", rep.el_residual)?;
    out.set_item(
        "contraction",
        rep.contraction_estimates.last().copied().unwrap_or(0.0),
    )?;
    out.set_item("w", PyField { inner: rep.w }.into_pyobject(py)?)?;
    out.set_item("u", PyField { inner: rep.u }.into_pyobject(py)?)?;
    Ok(out.into())
}

/// Least squares on (log x, log y); returns (slope, intercept, r_squared).
#[pyfunction]
fn fit_slope(points: Vec<(f64, f64)>) -> PyResult<(f64, f64, f64)> {
    let fit = ripple::experiments::fit_slope(&points).map_err(err)?;
    Ok((fit.slope, fit.intercept, fit.r_squared))
}

#[pyfunction]
fn write_snapshot(field: &PyField, path: &str) -> PyResult<String> {
    spectral::write_snapshot(&field.inner, std::path::Path::new(path)).map_err(err)
}

#[pyfunction]
fn read_snapshot(path: &str) -> PyResult<PyField> {
    Ok(PyField {
        inner: spectral::read_snapshot(std::path::Path::new(path)).map_err(err)?,
    })
}

#[pymodule]
fn ripple_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTorusGrid>()?;
    m.add_class::<PyField>()?;
    m.add_function(wrap_pyfunction!(sample_white_noise, m)?)?;
    m.add_function(wrap_pyfunction!(project_p, m)?)?;
    m.add_function(wrap_pyfunction!(hilbert, m)?)?;
    m.add_function(wrap_pyfunction!(heat_convolve, m)?)?;
    m.add_function(wrap_pyfunction!(mollify, m)?)?;
    m.add_function(wrap_pyfunction!(dealiased_product, m)?)?;
    m.add_function(wrap_pyfunction!(solve_linear, m)?)?;
    m.add_function(wrap_pyfunction!(offline_product, m)?)?;
    m.add_function(wrap_pyfunction!(euler_lagrange_residual, m)?)?;
    m.add_function(wrap_pyfunction!(energy, m)?)?;
    m.add_function(wrap_pyfunction!(cc_distance, m)?)?;
    m.add_function(wrap_pyfunction!(holder_pos, m)?)?;
    m.add_function(wrap_pyfunction!(holder_neg, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_point, m)?)?;
    m.add_function(wrap_pyfunction!(fit_slope, m)?)?;
    m.add_function(wrap_pyfunction!(write_snapshot, m)?)?;
    m.add_function(wrap_pyfunction!(read_snapshot, m)?)?;
    Ok(())
}
