//! Python bindings: generators, integration, diagnostics and export.
//!
//! Bloch vectors cross the boundary as 3-tuples, density matrices as nested
//! 2×2 lists of complex numbers, and diagnostic results as plain dicts.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use lorenz_qubit_core as core;
use lorenz_qubit_core::diagnostics::{self, LyapunovSettings};
use lorenz_qubit_core::io::{self, Plane, PlotOptions};
use lorenz_qubit_core::{Axis, BlochVector, DensityMatrix, GPParams, Lor63Params, Mat3, Method};

create_exception!(lorenz_qubit, NumericalError, PyRuntimeError);

type Vec3 = (f64, f64, f64);

fn err(e: core::Error) -> PyErr {
    match e.exit_code() {
        1 => PyValueError::new_err(e.to_string()),
        2 => NumericalError::new_err(e.to_string()),
        _ => PyOSError::new_err(e.to_string()),
    }
}

fn bloch((x, y, z): Vec3) -> BlochVector {
    BlochVector::new(x, y, z)
}

fn tuple(r: BlochVector) -> Vec3 {
    (r.x, r.y, r.z)
}

fn density(m: [[Complex64; 2]; 2]) -> DensityMatrix {
    DensityMatrix::new(m)
}

fn axis(name: &str) -> PyResult<Axis> {
    name.parse().map_err(err)
}

/// Serialize through JSON into plain Python objects.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "Generator", module = "lorenz_qubit", frozen)]
struct PyGenerator(core::TorsionGenerator);

#[pymethods]
impl PyGenerator {
    /// Lorenz-63 qubit generator.
    #[staticmethod]
    #[pyo3(signature = (rho = 28.0, sigma = 10.0, beta = 8.0 / 3.0, g = 80.0))]
    fn lor63(rho: f64, sigma: f64, beta: f64, g: f64) -> Self {
        PyGenerator(core::lor63_generator(&Lor63Params { rho, sigma, beta, g }))
    }

    /// GP butterfly generator.
    #[staticmethod]
    #[pyo3(signature = (m = 10.0, g = 40.0))]
    fn gp(m: f64, g: f64) -> Self {
        PyGenerator(core::gp_generator(&GPParams { m, g }))
    }

    /// `L + g (e·r) J_axis` with an arbitrary 3×3 linear part.
    #[staticmethod]
    fn custom(linear: [[f64; 3]; 3], projection_axis: Vec3, g: f64, twist_axis: &str) -> PyResult<Self> {
        core::custom_generator(Mat3(linear), bloch(projection_axis), g, axis(twist_axis)?)
            .map(PyGenerator)
            .map_err(err)
    }

    #[getter]
    fn linear(&self) -> [[f64; 3]; 3] {
        self.0.linear.0
    }

    #[getter]
    fn g(&self) -> f64 {
        self.0.g
    }

    fn evaluate(&self, r: Vec3) -> [[f64; 3]; 3] {
        self.0.evaluate(bloch(r)).0
    }

    fn vector_field(&self, r: Vec3) -> Vec3 {
        tuple(self.0.vector_field(bloch(r)))
    }

    fn jacobian(&self, r: Vec3) -> [[f64; 3]; 3] {
        self.0.jacobian(bloch(r)).0
    }

    fn __repr__(&self) -> String {
        format!("Generator(g={}, linear={:?})", self.0.g, self.0.linear.0)
    }
}

#[pyclass(name = "IntegratorConfig", module = "lorenz_qubit", frozen)]
struct PyIntegratorConfig(core::IntegratorConfig);

#[pymethods]
impl PyIntegratorConfig {
    #[new]
    #[pyo3(signature = (method = "rk45", dt = 5e-3, rel_tol = 1e-9, abs_tol = 1e-9, t_max = 200.0, sample_every = 1, max_steps = 50_000_000))]
    fn new(
        method: &str,
        dt: f64,
        rel_tol: f64,
        abs_tol: f64,
        t_max: f64,
        sample_every: usize,
        max_steps: usize,
    ) -> PyResult<Self> {
        let cfg = core::IntegratorConfig {
            method: method.parse::<Method>().map_err(err)?,
            dt,
            rel_tol,
            abs_tol,
            t_max,
            sample_every,
            max_steps,
        };
        cfg.validate().map_err(err)?;
        Ok(PyIntegratorConfig(cfg))
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

#[pyclass(name = "Trajectory", module = "lorenz_qubit", frozen)]
struct PyTrajectory(core::Trajectory);

#[pymethods]
impl PyTrajectory {
    fn __len__(&self) -> usize {
        self.0.samples.len()
    }

    #[getter]
    fn t(&self) -> Vec<f64> {
        self.0.samples.iter().map(|s| s.t).collect()
    }

    #[getter]
    fn r(&self) -> Vec<Vec3> {
        self.0.samples.iter().map(|s| tuple(s.r)).collect()
    }

    #[getter]
    fn norm(&self) -> Vec<f64> {
        self.0.samples.iter().map(|s| s.norm).collect()
    }

    #[getter]
    fn purity(&self) -> Vec<f64> {
        self.0.samples.iter().map(|s| s.purity).collect()
    }

    #[getter]
    fn entropy(&self) -> Vec<f64> {
        self.0.samples.iter().map(|s| s.entropy).collect()
    }

    #[getter]
    fn trace_error(&self) -> Vec<f64> {
        self.0.samples.iter().map(|s| s.trace_error).collect()
    }

    #[getter]
    fn termination<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0.termination)
    }

    fn max_norm_after(&self, cutoff: f64) -> Option<f64> {
        self.0.max_norm_after(cutoff)
    }

    /// Write the trajectory as CSV.
    fn export_csv(&self, path: PathBuf) -> PyResult<()> {
        io::export_trajectory(&self.0, &path).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Trajectory({} samples, t_end={}, termination={:?})",
            self.0.samples.len(),
            self.0.last().t,
            self.0.termination
        )
    }
}

#[pyfunction]
fn density_from_bloch(r: Vec3) -> [[Complex64; 2]; 2] {
    core::density_from_bloch(bloch(r)).entries
}

#[pyfunction]
fn bloch_from_density(x: [[Complex64; 2]; 2]) -> PyResult<Vec3> {
    core::bloch_from_density(&density(x)).map(tuple).map_err(err)
}

#[pyfunction]
fn purity(r: Vec3) -> f64 {
    core::purity(bloch(r))
}

/// Von Neumann entropy in nats.
#[pyfunction]
fn von_neumann_entropy(r: Vec3) -> PyResult<f64> {
    core::von_neumann_entropy(bloch(r)).map_err(err)
}

#[pyfunction]
fn check_state<'py>(py: Python<'py>, x: [[Complex64; 2]; 2]) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &core::check_state(&density(x)))
}

#[pyfunction]
fn step_rk4(generator: &PyGenerator, r: Vec3, dt: f64) -> PyResult<Vec3> {
    core::step_rk4(&generator.0, bloch(r), dt).map(tuple).map_err(err)
}

#[pyfunction]
fn integrate_bloch(py: Python<'_>, generator: &PyGenerator, r0: Vec3, config: &PyIntegratorConfig) -> PyResult<PyTrajectory> {
    let (gen, cfg) = (generator.0, config.0);
    py.detach(|| core::integrate_bloch(&gen, bloch(r0), &cfg))
        .map(PyTrajectory)
        .map_err(err)
}

#[pyfunction]
fn integrate_density(
    py: Python<'_>,
    generator: &PyGenerator,
    x0: [[Complex64; 2]; 2],
    config: &PyIntegratorConfig,
) -> PyResult<PyTrajectory> {
    let (gen, cfg) = (generator.0, config.0);
    py.detach(|| core::integrate_density(&gen, &density(x0), &cfg))
        .map(PyTrajectory)
        .map_err(err)
}

#[pyfunction]
fn ensemble(py: Python<'_>, generator: &PyGenerator, seeds: Vec<Vec3>, config: &PyIntegratorConfig) -> PyResult<Vec<PyTrajectory>> {
    let (gen, cfg) = (generator.0, config.0);
    let seeds: Vec<_> = seeds.into_iter().map(bloch).collect();
    py.detach(|| core::ensemble(&gen, &seeds, &cfg))
        .map(|ts| ts.into_iter().map(PyTrajectory).collect())
        .map_err(err)
}

/// `count` seeds drawn uniformly from the ball of `radius`, reproducible from `rng_seed`.
#[pyfunction]
fn uniform_seeds(count: usize, radius: f64, rng_seed: u64) -> PyResult<Vec<Vec3>> {
    let cfg = io::RunConfig {
        initial: io::InitialCondition::Ensemble { count, radius, rng_seed },
        ..Default::default()
    };
    cfg.validate().map_err(err)?;
    Ok(cfg.seeds().into_iter().map(tuple).collect())
}

#[pyfunction]
#[pyo3(signature = (generator, guess, tol = 1e-12, max_iter = diagnostics::DEFAULT_MAX_ITER))]
fn newton_fixed_point<'py>(
    py: Python<'py>,
    generator: &PyGenerator,
    guess: Vec3,
    tol: f64,
    max_iter: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let fp = diagnostics::newton_fixed_point(&generator.0, bloch(guess), tol, max_iter).map_err(err)?;
    to_py(py, &fp)
}

#[pyfunction]
#[pyo3(signature = (generator, guesses, tol = 1e-12, max_iter = diagnostics::DEFAULT_MAX_ITER))]
fn find_fixed_points<'py>(
    py: Python<'py>,
    generator: &PyGenerator,
    guesses: Vec<Vec3>,
    tol: f64,
    max_iter: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let guesses: Vec<_> = guesses.into_iter().map(bloch).collect();
    to_py(py, &diagnostics::find_fixed_points(&generator.0, &guesses, tol, max_iter))
}

fn lyapunov_inputs(
    config: Option<&PyIntegratorConfig>,
    transient: f64,
    total_time: f64,
    renorm_interval: f64,
) -> (LyapunovSettings, core::IntegratorConfig) {
    let settings = LyapunovSettings { transient, total_time, renorm_interval };
    let cfg = config.map_or_else(core::IntegratorConfig::default, |c| c.0);
    (settings, cfg)
}

#[pyfunction]
#[pyo3(signature = (generator, r0, transient = 20.0, total_time = 2000.0, renorm_interval = 0.5, config = None))]
fn largest_lyapunov<'py>(
    py: Python<'py>,
    generator: &PyGenerator,
    r0: Vec3,
    transient: f64,
    total_time: f64,
    renorm_interval: f64,
    config: Option<&PyIntegratorConfig>,
) -> PyResult<Bound<'py, PyAny>> {
    let (settings, cfg) = lyapunov_inputs(config, transient, total_time, renorm_interval);
    let gen = generator.0;
    let res = py
        .detach(|| diagnostics::largest_lyapunov(&gen, bloch(r0), &settings, &cfg))
        .map_err(err)?;
    to_py(py, &res)
}

#[pyfunction]
#[pyo3(signature = (generator, r0, transient = 20.0, total_time = 2000.0, renorm_interval = 0.5, config = None))]
fn lyapunov_spectrum<'py>(
    py: Python<'py>,
    generator: &PyGenerator,
    r0: Vec3,
    transient: f64,
    total_time: f64,
    renorm_interval: f64,
    config: Option<&PyIntegratorConfig>,
) -> PyResult<Bound<'py, PyAny>> {
    let (settings, cfg) = lyapunov_inputs(config, transient, total_time, renorm_interval);
    let gen = generator.0;
    let res = py
        .detach(|| diagnostics::lyapunov_spectrum(&gen, bloch(r0), &settings, &cfg))
        .map_err(err)?;
    to_py(py, &res)
}

/// Lobe switching along `axis`; the threshold defaults to the Lorenz-63 choice.
#[pyfunction]
#[pyo3(signature = (trajectory, axis_name = "x", threshold = None))]
fn lobe_statistics<'py>(
    py: Python<'py>,
    trajectory: &PyTrajectory,
    axis_name: &str,
    threshold: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let threshold = threshold.unwrap_or_else(|| diagnostics::default_lobe_threshold(&Lor63Params::default()));
    let stats = diagnostics::lobe_statistics(&trajectory.0, axis(axis_name)?, threshold);
    let cv = stats.coefficient_of_variation();
    let out = to_py(py, &stats)?;
    out.set_item("coefficient_of_variation", cv)?;
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (trajectory, m = 10.0, g = 40.0))]
fn conservation_monitor<'py>(py: Python<'py>, trajectory: &PyTrajectory, m: f64, g: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &diagnostics::conservation_monitor(&trajectory.0, &GPParams { m, g }))
}

/// `(C, H)` of the GP butterfly at `r`.
#[pyfunction]
#[pyo3(signature = (r, m = 10.0, g = 40.0))]
fn gp_invariants(r: Vec3, m: f64, g: f64) -> (f64, f64) {
    diagnostics::gp_invariants(bloch(r), &GPParams { m, g })
}

#[pyfunction]
fn entropy_series<'py>(py: Python<'py>, trajectory: &PyTrajectory) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &diagnostics::entropy_series(&trajectory.0))
}

#[pyfunction]
#[pyo3(signature = (trajectories, path, plane = "xz", transient = 5.0, max_points_per_trajectory = 400))]
fn render_projection<'py>(
    py: Python<'py>,
    trajectories: Vec<PyRef<'py, PyTrajectory>>,
    path: PathBuf,
    plane: &str,
    transient: f64,
    max_points_per_trajectory: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let plane = match plane {
        "xy" => Plane::Xy,
        "xz" => Plane::Xz,
        "yz" => Plane::Yz,
        other => return Err(PyValueError::new_err(format!("unknown plane `{other}`"))),
    };
    let opts = PlotOptions { plane, transient, max_points_per_trajectory, ..Default::default() };
    let trajs: Vec<_> = trajectories.iter().map(|t| t.0.clone()).collect();
    let summary = io::render_projection(&trajs, &path, &opts).map_err(err)?;
    to_py(py, &summary)
}

/// Run the command line with `args` (without the program name); returns the exit status.
#[pyfunction]
fn run_cli(py: Python<'_>, args: Vec<String>) -> i32 {
    py.detach(|| core::cli::main_with_args(std::iter::once("lorenz-qubit".to_string()).chain(args)))
}

#[pymodule]
fn lorenz_qubit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<PyGenerator>()?;
    m.add_class::<PyIntegratorConfig>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(density_from_bloch, m)?)?;
    m.add_function(wrap_pyfunction!(bloch_from_density, m)?)?;
    m.add_function(wrap_pyfunction!(purity, m)?)?;
    m.add_function(wrap_pyfunction!(von_neumann_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(check_state, m)?)?;
    m.add_function(wrap_pyfunction!(step_rk4, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_bloch, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_density, m)?)?;
    m.add_function(wrap_pyfunction!(ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(uniform_seeds, m)?)?;
    m.add_function(wrap_pyfunction!(newton_fixed_point, m)?)?;
    m.add_function(wrap_pyfunction!(find_fixed_points, m)?)?;
    m.add_function(wrap_pyfunction!(largest_lyapunov, m)?)?;
    m.add_function(wrap_pyfunction!(lyapunov_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(lobe_statistics, m)?)?;
    m.add_function(wrap_pyfunction!(conservation_monitor, m)?)?;
    m.add_function(wrap_pyfunction!(gp_invariants, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_series, m)?)?;
    m.add_function(wrap_pyfunction!(render_projection, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
