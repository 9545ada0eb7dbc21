//! Python bindings for the `mncf` crate.

use num_bigint::BigUint;
use num_rational::BigRational;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use mncf::enumeration::{self, count_equivalence_classes};
use mncf::io;
use mncf::network::{self, derrida_mean_field, derrida_mean_field_ensemble, DerridaCurve};
use mncf::sampler::{self, substream, CanonicalSampler};
use mncf::sensitivity;
use mncf::{CanonicalNcf, Distribution, EnsembleSpec, InDegree, Network, NetworkSpec, PrimeModulus, TruthTable};

fn err(e: mncf::Error) -> PyErr {
    match e {
        mncf::Error::Capacity { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn prime(p: u32) -> PyResult<PrimeModulus> {
    PrimeModulus::new(p).map_err(err)
}

fn dist(name: &str) -> PyResult<Distribution> {
    name.parse().map_err(err)
}

fn fraction<'py>(py: Python<'py>, q: &BigRational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((q.numer().clone(), q.denom().clone()))
}

fn parse(text: &str) -> PyResult<serde_json::Value> {
    io::parse_json(text).map_err(err)
}

#[pyclass(name = "TruthTable", module = "mncf_py", eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyTruthTable {
    inner: TruthTable,
}

#[pymethods]
impl PyTruthTable {
    #[new]
    fn new(p: u32, n: usize, values: Vec<u32>) -> PyResult<Self> {
        Ok(Self { inner: TruthTable::new(prime(p)?, n, values).map_err(err)? })
    }

    /// Accepts a table or a canonical-form document.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: io::function_from_json(&parse(text)?).map_err(err)? })
    }

    fn to_json(&self) -> String {
        io::table_to_json(&self.inner).to_string()
    }

    #[getter]
    fn p(&self) -> u32 {
        self.inner.modulus().get()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.arity()
    }

    #[getter]
    fn values(&self) -> Vec<u32> {
        self.inner.values().to_vec()
    }

    fn evaluate(&self, x: Vec<u32>) -> PyResult<u32> {
        self.inner.evaluate(&x).map_err(err)
    }

    fn essential_variables(&self) -> Vec<usize> {
        self.inner.essential_variables()
    }

    /// `(var, input, output)` triples.
    fn canalizing_triples(&self) -> Vec<(usize, u32, u32)> {
        self.inner.canalizing_triples().into_iter().map(|t| (t.var, t.input, t.output)).collect()
    }

    fn permute_variables(&self, perm: Vec<usize>) -> PyResult<Self> {
        Ok(Self { inner: self.inner.permute_variables(&perm).map_err(err)? })
    }

    fn is_nested_canalizing(&self) -> bool {
        mncf::is_nested_canalizing(&self.inner)
    }

    fn decompose(&self) -> PyResult<Option<PyCanonical>> {
        Ok(mncf::decompose(&self.inner).map_err(err)?.map(|inner| PyCanonical { inner }))
    }

    /// Exact c-sensitivity as a `fractions.Fraction`.
    fn qc<'py>(&self, py: Python<'py>, c: usize) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &sensitivity::brute_force_qc(&self.inner, c).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        format!("TruthTable(p={}, n={}, values={:?})", self.p(), self.n(), self.inner.values())
    }
}

#[pyclass(name = "CanonicalNcf", module = "mncf_py", eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyCanonical {
    inner: CanonicalNcf,
}

#[pymethods]
impl PyCanonical {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: io::canonical_from_json(&parse(text)?).map_err(err)? })
    }

    fn to_json(&self) -> String {
        io::canonical_to_json(&self.inner).to_string()
    }

    /// Layers as lists of `(var, "L:j" | "U:j")`.
    #[getter]
    fn layers(&self) -> Vec<Vec<(usize, String)>> {
        self.inner.layers().iter().map(|l| l.iter().map(|e| (e.var, e.segment.to_string())).collect()).collect()
    }

    #[getter]
    fn constants(&self) -> Vec<u32> {
        self.inner.constants().to_vec()
    }

    #[getter]
    fn layer_number(&self) -> usize {
        self.inner.layer_number()
    }

    fn layer_sizes(&self) -> Vec<usize> {
        self.inner.layer_sizes()
    }

    fn layer_outputs(&self) -> Vec<u32> {
        self.inner.layer_outputs()
    }

    fn build(&self) -> PyTruthTable {
        PyTruthTable { inner: mncf::build(&self.inner) }
    }

    fn __repr__(&self) -> String {
        format!("CanonicalNcf({})", self.to_json())
    }
}

fn points(curve: DerridaCurve) -> Vec<(usize, f64, Option<f64>)> {
    curve.points.into_iter().map(|pt| (pt.m, pt.d, pt.stderr)).collect()
}

#[pyclass(name = "Network", module = "mncf_py", eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyNetwork {
    inner: Network,
}

#[pymethods]
impl PyNetwork {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: io::network_from_json(&parse(text)?).map_err(err)? })
    }

    fn to_json(&self) -> String {
        io::network_to_json(&self.inner).to_string()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn step(&self, state: Vec<u32>) -> PyResult<Vec<u32>> {
        self.inner.step(&state).map_err(err)
    }

    /// `(cycle states, basin size)` pairs sorted by smallest state.
    #[pyo3(signature = (state_cap = network::DEFAULT_STATE_CAP))]
    fn attractors(&self, state_cap: u64) -> PyResult<Vec<(Vec<Vec<u32>>, u64)>> {
        let found = network::attractors(&self.inner, state_cap).map_err(err)?;
        Ok(found
            .into_iter()
            .map(|a| (a.cycle.iter().map(|&s| self.inner.decode_state(s)).collect(), a.basin_size))
            .collect())
    }

    /// `(m, D, None)` from exact node sensitivities.
    fn derrida_mean_field(&self, ms: Vec<usize>) -> PyResult<Vec<(usize, f64, Option<f64>)>> {
        Ok(points(derrida_mean_field(&self.inner, &ms).map_err(err)?))
    }

    /// `(m, D, stderr)` by simulation on this network.
    #[pyo3(signature = (ms, samples, seed = 0, workers = 1))]
    fn derrida_monte_carlo(
        &self,
        ms: Vec<usize>,
        samples: u64,
        seed: u64,
        workers: usize,
    ) -> PyResult<Vec<(usize, f64, Option<f64>)>> {
        Ok(points(network::derrida_quenched(&self.inner, &ms, samples, seed, workers).map_err(err)?))
    }
}

fn network_spec(nodes: usize, p: u32, indegree: usize, distribution: &str, allow_self_inputs: bool) -> PyResult<NetworkSpec> {
    let mut spec = NetworkSpec::new(nodes, prime(p)?, InDegree::Constant(indegree), dist(distribution)?);
    spec.allow_self_inputs = allow_self_inputs;
    Ok(spec)
}

/// Exact count; `method` is `closed`, `recursive` or `egf`.
#[pyfunction]
#[pyo3(signature = (p, n, method = "closed"))]
fn count_ncfs(p: u32, n: usize, method: &str) -> PyResult<BigUint> {
    let p = prime(p)?;
    match method {
        "closed" => enumeration::count_ncfs(p, n),
        "recursive" => enumeration::count_ncfs_recursive(p, n),
        "egf" => enumeration::count_ncfs_egf(p, n),
        _ => return Err(PyValueError::new_err(format!("unknown method `{method}`"))),
    }
    .map_err(err)
}

#[pyfunction]
fn count_classes(p: u32, n: usize) -> PyResult<BigUint> {
    count_equivalence_classes(prime(p)?, n).map_err(err)
}

/// Rows `(n, exact, approx, rel_error)`.
#[pyfunction]
fn approximation_error_table(p: u32, n_max: usize) -> PyResult<Vec<(usize, BigUint, String, f64)>> {
    let rows = enumeration::approximation_error_table(prime(p)?, n_max).map_err(err)?;
    Ok(rows.into_iter().map(|r| (r.n, r.exact.clone(), r.approx.clone(), r.rel_error())).collect())
}

#[pyfunction]
fn ensemble_qc_formula<'py>(py: Python<'py>, p: u32, n: usize, c: usize) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, &sensitivity::ensemble_qc_formula(prime(p)?, n, c).map_err(err)?)
}

#[pyfunction]
fn ensemble_qc_direct_sum<'py>(py: Python<'py>, p: u32, n: usize, c: usize) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, &sensitivity::ensemble_qc_direct_sum(prime(p)?, n, c).map_err(err)?)
}

/// `(mean, stderr)` over `samples` functions from the ensemble.
#[pyfunction]
#[pyo3(signature = (p, n, c, samples, seed = 0, workers = 1, distribution = "parameter"))]
fn monte_carlo_ensemble_qc(
    p: u32,
    n: usize,
    c: usize,
    samples: u64,
    seed: u64,
    workers: usize,
    distribution: &str,
) -> PyResult<(f64, Option<f64>)> {
    let spec = EnsembleSpec::new(prime(p)?, n, dist(distribution)?);
    let est = sensitivity::monte_carlo_ensemble_qc(&spec, c, samples, seed, workers).map_err(err)?;
    Ok((est.mean, est.stderr))
}

/// Draw `index` of the stream for `seed`.
#[pyfunction]
#[pyo3(signature = (p, n, distribution = "function", seed = 0, index = 0, layers = None, composition = None))]
fn sample_canonical(
    p: u32,
    n: usize,
    distribution: &str,
    seed: u64,
    index: u64,
    layers: Option<usize>,
    composition: Option<Vec<usize>>,
) -> PyResult<PyCanonical> {
    let mut spec = EnsembleSpec::new(prime(p)?, n, dist(distribution)?);
    spec.layers = layers;
    spec.composition = composition;
    let sampler = CanonicalSampler::new(spec).map_err(err)?;
    Ok(PyCanonical { inner: sampler.sample(&mut substream(seed, index)).map_err(err)? })
}

#[pyfunction]
#[pyo3(signature = (nodes, p, indegree, distribution = "parameter", seed = 0, allow_self_inputs = false))]
fn sample_network(
    nodes: usize,
    p: u32,
    indegree: usize,
    distribution: &str,
    seed: u64,
    allow_self_inputs: bool,
) -> PyResult<PyNetwork> {
    let spec = network_spec(nodes, p, indegree, distribution, allow_self_inputs)?;
    Ok(PyNetwork { inner: sampler::sample_network(&spec, &mut substream(seed, 0)).map_err(err)? })
}

/// Annealed `(m, D, stderr)`: Monte Carlo when `samples` is given, else mean field.
#[pyfunction]
#[pyo3(signature = (nodes, p, indegree, ms, samples = None, distribution = "parameter", seed = 0, workers = 1))]
#[allow(clippy::too_many_arguments)]
fn derrida_annealed(
    nodes: usize,
    p: u32,
    indegree: usize,
    ms: Vec<usize>,
    samples: Option<u64>,
    distribution: &str,
    seed: u64,
    workers: usize,
) -> PyResult<Vec<(usize, f64, Option<f64>)>> {
    let spec = network_spec(nodes, p, indegree, distribution, false)?;
    let curve = match samples {
        Some(s) => network::derrida_annealed(&spec, &ms, s, seed, workers),
        None => derrida_mean_field_ensemble(&spec, &ms),
    };
    Ok(points(curve.map_err(err)?))
}

#[pymodule]
pub fn mncf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTruthTable>()?;
    m.add_class::<PyCanonical>()?;
    m.add_class::<PyNetwork>()?;
    m.add_function(wrap_pyfunction!(count_ncfs, m)?)?;
    m.add_function(wrap_pyfunction!(count_classes, m)?)?;
    m.add_function(wrap_pyfunction!(approximation_error_table, m)?)?;
    m.add_function(wrap_pyfunction!(ensemble_qc_formula, m)?)?;
    m.add_function(wrap_pyfunction!(ensemble_qc_direct_sum, m)?)?;
    m.add_function(wrap_pyfunction!(monte_carlo_ensemble_qc, m)?)?;
    m.add_function(wrap_pyfunction!(sample_canonical, m)?)?;
    m.add_function(wrap_pyfunction!(sample_network, m)?)?;
    m.add_function(wrap_pyfunction!(derrida_annealed, m)?)?;
    m.add("RNG", sampler::RNG_NAME)?;
    Ok(())
}
