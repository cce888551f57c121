//! Python bindings: suite problems, the regularized solver and the
//! discrepancy-principle pipeline. Vectors cross the boundary as lists of
//! floats; results come back as dicts.

use monoreg_core as core;
use monoreg_core::{Operator, SuiteProblem};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: core::Error) -> PyErr {
    match e {
        core::Error::InvalidArgument(_)
        | core::Error::InvalidConfig(_)
        | core::Error::DimensionMismatch { .. }
        | core::Error::EmptyVector
        | core::Error::NonFinite(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn vector(values: Vec<f64>) -> PyResult<core::Vector> {
    core::Vector::new(values).map_err(to_py)
}

fn parse_method(method: &str) -> PyResult<core::InnerMethod> {
    match method {
        "auto" => Ok(core::InnerMethod::Auto),
        "fixed_point" => Ok(core::InnerMethod::FixedPoint),
        "cg" => Ok(core::InnerMethod::ConjugateGradient),
        other => Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    }
}

fn parse_solution(y: &str, scale: f64) -> PyResult<core::SolutionSpec> {
    match y {
        "ones" => Ok(core::SolutionSpec::Constant(scale)),
        "harmonic" => Ok(core::SolutionSpec::Harmonic(scale)),
        "sine" => Ok(core::SolutionSpec::Sine(scale)),
        other => Err(PyValueError::new_err(format!(
            "unknown solution shape {other:?}"
        ))),
    }
}

/// A benchmark problem with known exact solution.
#[pyclass(name = "Problem", frozen)]
struct PyProblem {
    inner: core::Problem,
}

#[pymethods]
impl PyProblem {
    /// Diagonal operator with eigenvalues `i^-p` (`decay="poly"`) or
    /// `exp(-r(i-1))` (`decay="exp"`).
    #[staticmethod]
    #[pyo3(signature = (n, rate=2.0, decay="poly", y="harmonic", scale=1.0))]
    fn diagonal(n: usize, rate: f64, decay: &str, y: &str, scale: f64) -> PyResult<Self> {
        let decay = match decay {
            "poly" => core::Decay::Poly(rate),
            "exp" => core::Decay::Exp(rate),
            other => return Err(PyValueError::new_err(format!("unknown decay {other:?}"))),
        };
        let p = core::build_diagonal(n, decay, &parse_solution(y, scale)?).map_err(to_py)?;
        Ok(Self { inner: p.into() })
    }

    /// Diagonal operator with explicit eigenvalues and solution.
    #[staticmethod]
    fn diagonal_from(eigenvalues: Vec<f64>, y: Vec<f64>) -> PyResult<Self> {
        let p = core::DiagonalProblem::new(eigenvalues, vector(y)?).map_err(to_py)?;
        Ok(Self { inner: p.into() })
    }

    /// Midpoint discretization of the kernel `min(s, t)` on `[0, 1]`.
    #[staticmethod]
    #[pyo3(signature = (n, y="sine", scale=1.0))]
    fn fredholm(n: usize, y: &str, scale: f64) -> PyResult<Self> {
        let p = core::build_fredholm_with(n, &parse_solution(y, scale)?).map_err(to_py)?;
        Ok(Self { inner: p.into() })
    }

    /// `F(u) = A u + u³` with `A = diag(1/i)`.
    #[staticmethod]
    #[pyo3(signature = (n, y="harmonic", scale=0.5))]
    fn cubic(n: usize, y: &str, scale: f64) -> PyResult<Self> {
        let p = core::build_cubic(
            n,
            &core::CubicMatrix::InverseIndex,
            &parse_solution(y, scale)?,
        )
        .map_err(to_py)?;
        Ok(Self { inner: p.into() })
    }

    /// Rank-one projector onto `e1` with noise along `e2`.
    #[staticmethod]
    #[pyo3(signature = (dim=2))]
    fn rank_one(dim: usize) -> PyResult<Self> {
        let p = core::build_rank_one(dim).map_err(to_py)?;
        Ok(Self { inner: p.into() })
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, u: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.eval(&vector(u)?).map_err(to_py)?.to_vec())
    }

    fn exact_data(&self) -> Vec<f64> {
        self.inner.exact_data().to_vec()
    }

    fn solution(&self) -> Vec<f64> {
        self.inner.solution().to_vec()
    }

    #[pyo3(signature = (delta, seed=0))]
    fn noisy_data(&self, delta: f64, seed: u64) -> PyResult<Vec<f64>> {
        Ok(self.inner.noisy_data(delta, seed).map_err(to_py)?.to_vec())
    }

    /// Direct solution of `F(V) + aV = f_delta`.
    fn oracle_solution(&self, a: f64, f_delta: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self
            .inner
            .oracle_solution(a, &vector(f_delta)?)
            .map_err(to_py)?
            .to_vec())
    }

    fn __repr__(&self) -> String {
        format!(
            "Problem(name={:?}, dim={})",
            self.inner.name(),
            self.inner.dim()
        )
    }
}

/// `f + delta * xi` with `xi` a seeded uniform direction on the unit sphere.
#[pyfunction]
#[pyo3(signature = (f, delta, seed=0))]
fn make_noisy(f: Vec<f64>, delta: f64, seed: u64) -> PyResult<Vec<f64>> {
    Ok(core::make_noisy(&vector(f)?, delta, seed)
        .map_err(to_py)?
        .to_vec())
}

/// Step size and contraction factor for the fixed-point iteration.
#[pyfunction]
fn optimal_step(a: f64, lipschitz: f64) -> PyResult<(f64, f64)> {
    let s = core::optimal_step(a, lipschitz).map_err(to_py)?;
    Ok((s.lambda, s.q))
}

fn iteration_config(
    theta: f64,
    delta: f64,
    tol_min: f64,
    max_iter: usize,
    radius: f64,
    method: &str,
) -> PyResult<core::IterationConfig> {
    Ok(core::IterationConfig {
        theta,
        delta,
        tol_min,
        max_iter,
        radius,
        lambda_override: None,
        method: parse_method(method)?,
    })
}

/// Approximately solve `F(V) + aV = f_delta` to residual `max(theta*delta, tol_min)`.
#[pyfunction]
#[pyo3(signature = (problem, f_delta, a, delta, theta=0.4, tol_min=1e-12, max_iter=100_000, radius=10.0, method="auto"))]
#[allow(clippy::too_many_arguments)]
fn solve_regularized<'py>(
    py: Python<'py>,
    problem: &PyProblem,
    f_delta: Vec<f64>,
    a: f64,
    delta: f64,
    theta: f64,
    tol_min: f64,
    max_iter: usize,
    radius: f64,
    method: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = iteration_config(theta, delta, tol_min, max_iter, radius, method)?;
    let (v, trace) =
        core::solve_auto(&problem.inner, &vector(f_delta)?, a, None, &cfg).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("v", v.to_vec())?;
    d.set_item("n_stop", trace.n_stop)?;
    d.set_item("residual", trace.final_residual())?;
    d.set_item("residuals", trace.residuals.clone())?;
    d.set_item("q_hat", trace.q_hat)?;
    d.set_item("lipschitz", trace.lipschitz)?;
    Ok(d)
}

/// Discrepancy `phi(a)` and solution norm `psi(a)`.
#[pyfunction]
#[pyo3(signature = (problem, f_delta, a, delta, theta=0.4, tol_min=1e-12, radius=10.0))]
fn phi_psi(
    problem: &PyProblem,
    f_delta: Vec<f64>,
    a: f64,
    delta: f64,
    theta: f64,
    tol_min: f64,
    radius: f64,
) -> PyResult<(f64, f64)> {
    let cfg = iteration_config(theta, delta, tol_min, 100_000, radius, "auto")?;
    let r = core::phi_psi(&problem.inner, &vector(f_delta)?, a, &cfg).map_err(to_py)?;
    Ok((r.phi, r.psi))
}

/// Choose `a` by the discrepancy principle and return the regularized solution.
#[pyfunction]
#[pyo3(signature = (
    problem, f_delta, delta, c=1.5, gamma=0.9, c1=1.0, c2=2.0, theta=0.4, eps=1e-6,
    mode="band", exact_tol=1e-8, a_init=1.0, tol_min=1e-12, radius=10.0, audit=true
))]
#[allow(clippy::too_many_arguments)]
fn solve_discrepancy<'py>(
    py: Python<'py>,
    problem: &PyProblem,
    f_delta: Vec<f64>,
    delta: f64,
    c: f64,
    gamma: f64,
    c1: f64,
    c2: f64,
    theta: f64,
    eps: f64,
    mode: &str,
    exact_tol: f64,
    a_init: f64,
    tol_min: f64,
    radius: f64,
    audit: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let mode = match mode {
        "band" => core::Mode::Band,
        "exact" => core::Mode::Exact,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    let cfg = core::DiscrepancyConfig {
        c,
        gamma,
        c1,
        c2,
        theta,
        eps,
        a_init,
        mode,
        exact_tol,
        audit_monotonicity: audit,
        ..Default::default()
    };
    let solver = iteration_config(theta, delta, tol_min, 100_000, radius, "auto")?;
    let r = core::solve_discrepancy(&problem.inner, &vector(f_delta)?, delta, &cfg, &solver)
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("status", r.status.as_str())?;
    d.set_item("alpha", r.alpha.is_finite().then_some(r.alpha))?;
    d.set_item("v_delta", r.v_delta.to_vec())?;
    d.set_item("phi_value", r.phi_value)?;
    d.set_item("residual", r.residual)?;
    d.set_item("total_inner_iters", r.total_inner_iters)?;
    d.set_item("alpha_low", r.bracket.low)?;
    d.set_item("alpha_up", r.bracket.up)?;
    d.set_item("error_to_y", r.v_delta.distance(problem.inner.solution()))?;
    Ok(d)
}

#[pymodule]
fn monoreg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_function(wrap_pyfunction!(make_noisy, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_step, m)?)?;
    m.add_function(wrap_pyfunction!(solve_regularized, m)?)?;
    m.add_function(wrap_pyfunction!(phi_psi, m)?)?;
    m.add_function(wrap_pyfunction!(solve_discrepancy, m)?)?;
    Ok(())
}
