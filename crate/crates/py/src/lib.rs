//! Python bindings.
//!
//! Reports are handed to Python as plain dicts and lists, decoded from the
//! same JSON the CLI prints.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use twistcube::format::{deserialize, read_file, serialize, write_file};
use twistcube::harness::{run_sweep as run_sweep_inner, to_csv, SweepConfig};
use twistcube::metrics::{self, SampleOptions};
use twistcube::routing::{self, Path};
use twistcube::verify::{self, Suite, SuiteArgs};
use twistcube::{BuildOptions, CouplingPolicy, Error, RouterParams, Vertex};

create_exception!(pytwistcube, ResourceError, PyRuntimeError, "A size or memory limit was exceeded.");

fn to_py(e: Error) -> PyErr {
    if e.is_resource_rejection() {
        ResourceError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_policy(name: &str) -> PyResult<CouplingPolicy> {
    name.parse().map_err(PyValueError::new_err)
}

/// A random twisted hypercube. Immutable once built.
#[pyclass(frozen, name = "TwistedCube", module = "pytwistcube")]
struct PyCube {
    inner: twistcube::TwistedCube,
}

impl PyCube {
    fn vertex(&self, v: u32) -> PyResult<Vertex> {
        let v = Vertex(v);
        self.inner.check_vertex(v).map_err(to_py)?;
        Ok(v)
    }
}

#[pymethods]
impl PyCube {
    /// Build a graph of dimension `n` under `policy`
    /// ("independent", "duplicube" or "identity").
    #[new]
    #[pyo3(signature = (n, policy = "independent", seed = 0, mem_budget = None))]
    fn new(py: Python<'_>, n: u32, policy: &str, seed: u64, mem_budget: Option<u64>) -> PyResult<Self> {
        let policy = parse_policy(policy)?;
        let opts = match mem_budget {
            Some(mem_budget) => BuildOptions { mem_budget },
            None => BuildOptions::from_env().map_err(to_py)?,
        };
        let inner = py
            .detach(|| twistcube::TwistedCube::build_with(n, policy, seed, opts))
            .map_err(to_py)?;
        Ok(PyCube { inner })
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        Ok(PyCube {
            inner: deserialize(data).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PyCube {
            inner: read_file(&path).map_err(to_py)?,
        })
    }

    fn to_bytes(&self) -> Vec<u8> {
        serialize(&self.inner)
    }

    /// Write a TWC1 file; returns the byte count.
    fn save(&self, path: PathBuf) -> PyResult<u64> {
        write_file(&self.inner, &path).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.n()
    }

    #[getter]
    fn policy(&self) -> &'static str {
        self.inner.policy().name()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed()
    }

    #[getter]
    fn num_vertices(&self) -> u64 {
        self.inner.num_vertices()
    }

    /// Partner of `v` in the level-`k` matching.
    fn neighbor(&self, v: u32, k: u32) -> PyResult<u32> {
        Ok(self.inner.neighbor(Vertex(v), k).map_err(to_py)?.0)
    }

    fn neighbors(&self, v: u32) -> PyResult<Vec<u32>> {
        Ok(self.inner.neighbors(Vertex(v)).map_err(to_py)?.into_iter().map(|w| w.0).collect())
    }

    fn greedy_route<'py>(&self, py: Python<'py>, u: u32, v: u32) -> PyResult<Bound<'py, PyAny>> {
        let path = routing::greedy_route(&self.inner, self.vertex(u)?, self.vertex(v)?);
        to_dict(py, &path)
    }

    /// Ball-search route; `t` and `n0` default to the automatic schedule.
    #[pyo3(signature = (u, v, t = None, n0 = None))]
    fn twist_route<'py>(
        &self,
        py: Python<'py>,
        u: u32,
        v: u32,
        t: Option<u32>,
        n0: Option<u32>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let auto = RouterParams::auto(self.inner.n());
        let params = RouterParams {
            t: t.unwrap_or(auto.t),
            n0: n0.unwrap_or(auto.n0),
        };
        params.validate(self.inner.n()).map_err(to_py)?;
        let path = routing::twist_route(&self.inner, self.vertex(u)?, self.vertex(v)?, params);
        to_dict(py, &path)
    }

    fn validate_path(&self, vertices: Vec<u32>, levels: Vec<u8>, u: u32, v: u32) -> bool {
        let path = Path {
            vertices: vertices.into_iter().map(Vertex).collect(),
            levels,
            phases: Vec::new(),
        };
        routing::validate_path(&self.inner, &path, Vertex(u), Vertex(v))
    }

    fn ball_size(&self, v: u32, t: u32) -> PyResult<usize> {
        Ok(metrics::ball_size(&self.inner, self.vertex(v)?, t))
    }

    fn bfs_distances(&self, py: Python<'_>, source: u32) -> PyResult<Vec<u8>> {
        let s = self.vertex(source)?;
        Ok(py.detach(|| metrics::bfs_distances(&self.inner, s)))
    }

    fn eccentricity(&self, v: u32) -> PyResult<u32> {
        Ok(metrics::eccentricity(&self.inner, self.vertex(v)?))
    }

    #[pyo3(signature = (cap = metrics::DEFAULT_EXACT_CAP))]
    fn exact_diameter(&self, py: Python<'_>, cap: u32) -> PyResult<u32> {
        py.detach(|| metrics::exact_diameter(&self.inner, cap)).map_err(to_py)
    }

    #[pyo3(signature = (sources = 16, pairs = 1000, seed = 0))]
    fn diameter_sampled<'py>(
        &self,
        py: Python<'py>,
        sources: u64,
        pairs: u64,
        seed: u64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let opts = SampleOptions::new(sources, pairs, seed);
        let report = py.detach(|| metrics::diameter_bounds_sampled(&self.inner, &opts));
        to_dict(py, &report)
    }

    /// Run a check suite: "all", "balls", "injectivity", "subcube",
    /// "involution" or "quasi".
    #[pyo3(signature = (suite = "all", t = None, k = None, pairs = None, centers = None, seed = 0))]
    fn verify<'py>(
        &self,
        py: Python<'py>,
        suite: &str,
        t: Option<u32>,
        k: Option<u32>,
        pairs: Option<u64>,
        centers: Option<u64>,
        seed: u64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let suite: Suite = suite.parse().map_err(PyValueError::new_err)?;
        let args = SuiteArgs {
            t,
            k,
            pairs,
            centers,
            seed,
        };
        let outcome = py
            .detach(|| verify::run_suite(&self.inner, suite, &args))
            .map_err(to_py)?;
        to_dict(py, &outcome)
    }

    #[pyo3(signature = (k, t = 3, pairs = 1000, seed = 0))]
    fn estimate_quasirandomness<'py>(
        &self,
        py: Python<'py>,
        k: u32,
        t: u32,
        pairs: u64,
        seed: u64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let report = py
            .detach(|| verify::estimate_quasirandomness(&self.inner, k, t, pairs, seed))
            .map_err(to_py)?;
        to_dict(py, &report)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "TwistedCube(n={}, policy='{}', seed={})",
            self.inner.n(),
            self.inner.policy().name(),
            self.inner.seed()
        )
    }
}

/// Largest coordinate in which `u` and `v` differ, 0 if equal.
#[pyfunction]
fn alpha(u: u32, v: u32) -> u32 {
    twistcube::alpha(Vertex(u), Vertex(v))
}

/// Default `(t, n0)` router schedule for dimension `n`.
#[pyfunction]
fn router_params(n: u32) -> (u32, u32) {
    let p = RouterParams::auto(n);
    (p.t, p.n0)
}

#[pyfunction]
fn diameter_lower_bound(n: u32) -> PyResult<u32> {
    if n < 2 {
        return Err(PyValueError::new_err("the bound needs n >= 2"));
    }
    Ok(verify::diameter_lower_bound(n))
}

fn sweep_config(config: &str) -> PyResult<SweepConfig> {
    SweepConfig::parse(config).map_err(to_py)
}

/// Run a sweep from `key = value` config text; returns a list of dicts.
#[pyfunction]
fn run_sweep<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyAny>> {
    let cfg = sweep_config(config)?;
    let records = py.detach(|| run_sweep_inner(&cfg)).map_err(to_py)?;
    to_dict(py, &records)
}

/// Run a sweep and return the CSV text.
#[pyfunction]
fn sweep_csv(py: Python<'_>, config: &str) -> PyResult<String> {
    let cfg = sweep_config(config)?;
    let records = py.detach(|| run_sweep_inner(&cfg)).map_err(to_py)?;
    Ok(to_csv(&records))
}

#[pymodule]
fn pytwistcube(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCube>()?;
    m.add_function(wrap_pyfunction!(alpha, m)?)?;
    m.add_function(wrap_pyfunction!(router_params, m)?)?;
    m.add_function(wrap_pyfunction!(diameter_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_csv, m)?)?;
    m.add("ResourceError", m.py().get_type::<ResourceError>())?;
    m.add("MAX_DIMENSION", twistcube::MAX_DIMENSION)?;
    Ok(())
}
