//! Python bindings. Build with `--features extension-module` and import the
//! resulting shared library as `unireg`.

// pyo3 0.22's method macros trip this lint on every `PyResult` return.
#![allow(clippy::useless_conversion)]

use std::cell::RefCell;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use unireg::{CostOracle, Error, SearchInterval};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Divergence { .. } | Error::DriftOutOfRange { .. } => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// First-order passive unidirectional plant.
#[pyclass(frozen, module = "unireg")]
#[derive(Clone)]
struct PlantParams(unireg::PlantParams);

#[pymethods]
impl PlantParams {
    #[new]
    #[pyo3(signature = (a, b, c = 1.0, f = None, sample_period = 0.1))]
    fn new(a: f64, b: f64, c: f64, f: Option<f64>, sample_period: f64) -> PyResult<Self> {
        unireg::PlantParams::new(a, b, c, f.unwrap_or(a), sample_period)
            .map(Self)
            .map_err(to_py)
    }

    /// Constants identified for a twisted-and-coiled polymer muscle.
    #[staticmethod]
    fn tcp_muscle() -> Self {
        Self(unireg::PlantParams::tcp_muscle())
    }

    #[getter]
    fn a(&self) -> f64 {
        self.0.a()
    }
    #[getter]
    fn b(&self) -> f64 {
        self.0.b()
    }
    #[getter]
    fn c(&self) -> f64 {
        self.0.c()
    }
    #[getter]
    fn f(&self) -> f64 {
        self.0.f()
    }
    #[getter]
    fn sample_period(&self) -> f64 {
        self.0.sample_period()
    }

    fn __repr__(&self) -> String {
        format!(
            "PlantParams(a={}, b={}, c={}, f={}, sample_period={})",
            self.0.a(),
            self.0.b(),
            self.0.c(),
            self.0.f(),
            self.0.sample_period()
        )
    }
}

#[pyclass(frozen, module = "unireg")]
#[derive(Clone)]
struct RegulatorGains(unireg::RegulatorGains);

#[pymethods]
impl RegulatorGains {
    #[new]
    fn new(k: f64, n: f64) -> PyResult<Self> {
        unireg::RegulatorGains::new(k, n).map(Self).map_err(to_py)
    }

    #[getter]
    fn k(&self) -> f64 {
        self.0.k()
    }
    #[getter]
    fn n(&self) -> f64 {
        self.0.n()
    }

    fn __repr__(&self) -> String {
        format!("RegulatorGains(k={}, n={})", self.0.k(), self.0.n())
    }
}

/// Reference generator. Build one with the static constructors.
#[pyclass(frozen, module = "unireg")]
#[derive(Clone)]
struct TrajectorySpec(unireg::TrajectorySpec);

#[pymethods]
impl TrajectorySpec {
    #[staticmethod]
    #[pyo3(signature = (period, amplitude = 1.0, sample_period = 0.1))]
    fn rectangular(period: f64, amplitude: f64, sample_period: f64) -> PyResult<Self> {
        unireg::TrajectorySpec::rectangular(period, amplitude, sample_period)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (period, amplitude = 1.0, sample_period = 0.1))]
    fn versine(period: f64, amplitude: f64, sample_period: f64) -> PyResult<Self> {
        unireg::TrajectorySpec::versine(period, amplitude, sample_period)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (segment, amplitude = 1.0, sample_period = 0.1, seed = 0))]
    fn random_steps(segment: f64, amplitude: f64, sample_period: f64, seed: u64) -> PyResult<Self> {
        unireg::TrajectorySpec::random_steps(segment, amplitude, sample_period, seed)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (segment, amplitude = 1.0, sample_period = 0.1, seed = 0))]
    fn random_versine(segment: f64, amplitude: f64, sample_period: f64, seed: u64) -> PyResult<Self> {
        unireg::TrajectorySpec::random_versine(segment, amplitude, sample_period, seed)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (samples, sample_period = 0.1))]
    fn arbitrary(samples: Vec<f64>, sample_period: f64) -> PyResult<Self> {
        unireg::TrajectorySpec::arbitrary(samples, sample_period)
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.0.kind().name()
    }
    #[getter]
    fn steps_per_period(&self) -> usize {
        self.0.steps_per_period()
    }

    fn sample(&self, k: u64) -> f64 {
        self.0.sample(k)
    }

    fn samples(&self, start: u64, stop: u64) -> Vec<f64> {
        self.0.samples(start..stop)
    }
}

/// Next plant state from `x` under input `u >= 0`.
#[pyfunction]
fn plant_step(params: &PlantParams, x: f64, u: f64) -> PyResult<f64> {
    let s = unireg::PlantState { x, k: 0 };
    unireg::plant_step(&params.0, s, u).map(|s| s.x).map_err(to_py)
}

#[pyfunction]
fn control_output(gains: &RegulatorGains, e: f64, r: f64) -> PyResult<f64> {
    unireg::control_output(&gains.0, e, r).map_err(to_py)
}

/// Minimize `cost(x)` on `[lower, upper]`. Returns `(x, iterations, evaluations)`.
#[pyfunction]
#[pyo3(signature = (cost, lower, upper, tolerance = 1e-6))]
fn golden_section_1d(cost: &Bound<'_, PyAny>, lower: f64, upper: f64, tolerance: f64) -> PyResult<(f64, usize, usize)> {
    let interval = SearchInterval::new(lower, upper, tolerance).map_err(to_py)?;
    let raised: RefCell<Option<PyErr>> = RefCell::new(None);
    let mut oracle = CostOracle::new(|p: &[f64]| {
        cost.call1((p[0],)).and_then(|v| v.extract::<f64>()).map_err(|e| {
            raised.replace(Some(e));
            Error::NonFinite("python cost")
        })
    });
    let result = unireg::golden_section_1d(&mut oracle, interval);
    if let Some(e) = raised.take() {
        return Err(e);
    }
    let out = result.map_err(to_py)?;
    Ok((out.point, out.iterations, oracle.evaluations()))
}

/// Run a full session from a JSON config (same schema as the CLI's
/// `--config`). Keyword arguments override top-level fields.
///
/// Returns a dict with the report fields plus per-step columns.
#[pyfunction]
#[pyo3(signature = (config = None, **overrides))]
fn run_session<'py>(
    py: Python<'py>,
    config: Option<&str>,
    overrides: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut value: serde_json::Value = match config {
        Some(text) => serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?,
        None => serde_json::json!({}),
    };
    if let Some(kw) = overrides {
        let json = py.import_bound("json")?;
        let text: String = json.call_method1("dumps", (kw,))?.extract()?;
        let extra: serde_json::Value = serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        if let (Some(obj), Some(extra)) = (value.as_object_mut(), extra.as_object()) {
            obj.extend(extra.clone());
        } else {
            return Err(PyValueError::new_err("config must be a JSON object"));
        }
    }
    let cfg: unireg::SessionConfig = serde_json::from_value(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let report = py
        .allow_threads(|| unireg::run_adaptive_session(&cfg))
        .map_err(|f| to_py(f.error))?;

    let text = serde_json::to_string(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let out = py
        .import_bound("json")?
        .call_method1("loads", (text,))?
        .downcast_into::<PyDict>()?;
    let records: Vec<&unireg::StepRecord> = report.logs.iter().flat_map(|l| l.records.iter()).collect();
    type Column = (&'static str, fn(&unireg::StepRecord) -> f64);
    let columns: [Column; 7] = [
        ("t", |s| s.t),
        ("r", |s| s.r),
        ("x", |s| s.x),
        ("u", |s| s.u),
        ("e", |s| s.e),
        ("K", |s| s.gain_k),
        ("N", |s| s.gain_n),
    ];
    for (name, get) in columns {
        out.set_item(name, PyList::new_bound(py, records.iter().map(|s| get(s))))?;
    }
    out.set_item("episode", PyList::new_bound(py, records.iter().map(|s| s.episode)))?;
    Ok(out)
}

#[pymodule]
#[pyo3(name = "unireg")]
fn unireg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PlantParams>()?;
    m.add_class::<RegulatorGains>()?;
    m.add_class::<TrajectorySpec>()?;
    m.add_function(wrap_pyfunction!(plant_step, m)?)?;
    m.add_function(wrap_pyfunction!(control_output, m)?)?;
    m.add_function(wrap_pyfunction!(golden_section_1d, m)?)?;
    m.add_function(wrap_pyfunction!(run_session, m)?)?;
    Ok(())
}
