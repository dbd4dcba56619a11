//! Python bindings for `degseq`. Graphs cross the boundary as edge lists
//! `[(j, k), ...]` with `j < k`, matrices as nested lists, and traces and
//! reports as plain dicts.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use degseq::coupling::{self, EtaDenominatorMode};
use degseq::experiment::{self, ExperimentConfig};
use degseq::oracle::{self, OracleConfig};
use degseq::samplers::{self, RandomSource, SeqSampleMode, SeqSampler};
use degseq::{graph, Error, SimpleGraph, SymmetricProbMatrix};

fn err(e: Error) -> PyErr {
    match e {
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn edges(g: &SimpleGraph) -> Vec<(usize, usize)> {
    g.edges().map(|e| (e.lo(), e.hi())).collect()
}

fn dense(m: &SymmetricProbMatrix) -> Vec<Vec<f64>> {
    let n = m.n();
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { m.get(i, j) }).collect())
        .collect()
}

fn from_dense(rows: Vec<Vec<f64>>) -> PyResult<SymmetricProbMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    for i in 0..n {
        for j in i + 1..n {
            if (rows[i][j] - rows[j][i]).abs() > 1e-12 {
                return Err(PyValueError::new_err(format!("matrix is not symmetric at ({i},{j})")));
            }
        }
    }
    SymmetricProbMatrix::from_fn(n, |i, j| rows[i][j]).map_err(err)
}

fn prob_mode(s: &str) -> PyResult<SeqSampleMode> {
    match s {
        "exact" => Ok(SeqSampleMode::ExactOracle),
        "asymptotic" => Ok(SeqSampleMode::Asymptotic),
        _ => Err(PyValueError::new_err(format!("mode must be 'exact' or 'asymptotic', got {s:?}"))),
    }
}

fn denom_mode(s: &str) -> PyResult<EtaDenominatorMode> {
    match s {
        "exact-max" => Ok(EtaDenominatorMode::ExactMax),
        "certified-bound" => Ok(EtaDenominatorMode::CertifiedBound),
        _ => Err(PyValueError::new_err(format!(
            "denom must be 'exact-max' or 'certified-bound', got {s:?}"
        ))),
    }
}

fn to_pyobj<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "DegreeSequence", module = "degseq_py", frozen)]
struct PyDegreeSequence(graph::DegreeSequence);

#[pymethods]
impl PyDegreeSequence {
    #[new]
    fn new(degrees: Vec<u32>) -> PyResult<Self> {
        graph::DegreeSequence::new(degrees).map(Self).map_err(err)
    }

    #[staticmethod]
    fn regular(n: usize, d: u32) -> PyResult<Self> {
        graph::DegreeSequence::regular(n, d).map(Self).map_err(err)
    }

    /// Generator string such as `powerlaw:1000,2.5,9,16`.
    #[staticmethod]
    #[pyo3(signature = (spec, seed = 0))]
    fn generate(spec: &str, seed: u64) -> PyResult<Self> {
        let src = experiment::DegreeSource::parse(spec).map_err(err)?;
        experiment::generate_degree_sequence(&src, seed)
            .map(|g| Self(g.sequence))
            .map_err(err)
    }

    #[getter]
    fn degrees(&self) -> Vec<u32> {
        self.0.degrees().to_vec()
    }

    #[getter]
    fn total(&self) -> u64 {
        self.0.total()
    }

    fn is_graphical(&self) -> bool {
        self.0.is_graphical()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("DegreeSequence({:?})", self.0.degrees())
    }
}

#[pyclass(name = "CouplingParams", module = "degseq_py", frozen)]
struct PyCouplingParams(coupling::CouplingParams);

#[pymethods]
impl PyCouplingParams {
    /// Default schedule for `d`.
    #[staticmethod]
    fn default(d: &PyDegreeSequence) -> PyResult<Self> {
        coupling::default_params(&d.0).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_slack(d: &PyDegreeSequence, xi: f64, zeta: f64, zeta_prime: f64) -> PyResult<Self> {
        coupling::CouplingParams::from_slack(&d.0, xi, zeta, zeta_prime)
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn xi(&self) -> f64 {
        self.0.xi
    }

    #[getter]
    fn zeta(&self) -> f64 {
        self.0.zeta
    }

    #[getter]
    fn zeta_prime(&self) -> f64 {
        self.0.zeta_prime
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.0.lambda
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.0.warnings.clone()
    }

    /// Acceptance matrix `Λ`.
    fn accept(&self) -> Vec<Vec<f64>> {
        dense(&self.0.accept)
    }

    fn __repr__(&self) -> String {
        format!(
            "CouplingParams(xi={}, zeta={}, zeta_prime={}, lambda={})",
            self.0.xi, self.0.zeta, self.0.zeta_prime, self.0.lambda
        )
    }
}

#[pyfunction]
fn is_graphical(degrees: Vec<u32>) -> bool {
    graph::is_graphical(&degrees)
}

#[pyfunction]
fn p_matrix(d: &PyDegreeSequence) -> Vec<Vec<f64>> {
    dense(&graph::p_matrix(&d.0))
}

#[pyfunction]
fn q_matrix(d: &PyDegreeSequence) -> PyResult<Vec<Vec<f64>>> {
    graph::q_matrix(&d.0).map(|m| dense(&m)).map_err(err)
}

/// `f_c(Λ⊙Q)`, the edge law of `G_L`.
#[pyfunction]
fn coupled_law(d: &PyDegreeSequence, params: &PyCouplingParams) -> PyResult<Vec<Vec<f64>>> {
    coupling::coupled_law(&d.0, &params.0).map(|m| dense(&m)).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (d, runs = 1, seed = 0, mode = "asymptotic"))]
fn sample_gnd(d: &PyDegreeSequence, runs: usize, seed: u64, mode: &str) -> PyResult<Vec<Vec<(usize, usize)>>> {
    let sampler = SeqSampler::new(&d.0, prob_mode(mode)?, &OracleConfig::from_env()).map_err(err)?;
    (0..runs)
        .map(|i| {
            let mut rng = RandomSource::new(seed, i as u64);
            sampler.sample(&mut rng, &[]).map(|o| edges(&o.graph)).map_err(err)
        })
        .collect()
}

#[pyfunction]
#[pyo3(signature = (w, runs = 1, seed = 0))]
fn sample_gnw(w: Vec<Vec<f64>>, runs: usize, seed: u64) -> PyResult<Vec<Vec<(usize, usize)>>> {
    let w = from_dense(w)?;
    Ok((0..runs)
        .map(|i| edges(&samplers::sample_gnw(&w, &mut RandomSource::new(seed, i as u64))))
        .collect())
}

#[pyfunction]
#[pyo3(signature = (d, params, runs = 1, seed = 0))]
fn seq_approx_p(
    d: &PyDegreeSequence,
    params: &PyCouplingParams,
    runs: usize,
    seed: u64,
) -> PyResult<Vec<Vec<(usize, usize)>>> {
    let sampler = samplers::SeqApproxP::new(&d.0, params.0.lambda, params.0.accept.clone()).map_err(err)?;
    Ok((0..runs)
        .map(|i| edges(&sampler.sample(&mut RandomSource::new(seed, i as u64))))
        .collect())
}

/// One coupled run: `{"g_l": edges, "g": edges, "trace": {...}}`.
#[pyfunction]
#[pyo3(signature = (d, params = None, seed = 0, stream = 0, mode = "asymptotic", denom = "certified-bound"))]
fn run_coupling<'py>(
    py: Python<'py>,
    d: &PyDegreeSequence,
    params: Option<&PyCouplingParams>,
    seed: u64,
    stream: u64,
    mode: &str,
    denom: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let params = match params {
        Some(p) => p.0.clone(),
        None => coupling::default_params(&d.0).map_err(err)?,
    };
    let mut rng = RandomSource::new(seed, stream);
    let out = coupling::run_coupling(
        &d.0,
        &params,
        prob_mode(mode)?,
        denom_mode(denom)?,
        &mut rng,
        &OracleConfig::from_env(),
    )
    .map_err(err)?;
    let dict = PyDict::new(py);
    dict.set_item("g_l", edges(&out.g_l))?;
    dict.set_item("g", edges(&out.g))?;
    dict.set_item("trace", to_pyobj(py, &out.trace)?)?;
    Ok(dict)
}

#[pyfunction]
fn enumerate_graphs(d: &PyDegreeSequence) -> PyResult<Vec<Vec<(usize, usize)>>> {
    let fam = oracle::enumerate_graphs(&d.0, &[], &[], &OracleConfig::from_env()).map_err(err)?;
    Ok(fam.members().map(|g| edges(&g)).collect())
}

#[pyfunction]
fn exact_edge_marginals(d: &PyDegreeSequence) -> PyResult<Vec<Vec<f64>>> {
    oracle::exact_edge_marginals(&d.0, &OracleConfig::from_env())
        .map(|m| dense(&m))
        .map_err(err)
}

/// Runs a TOML experiment config and returns its metadata dict.
#[pyfunction]
fn run_experiment<'py>(py: Python<'py>, config_path: std::path::PathBuf) -> PyResult<Bound<'py, PyAny>> {
    let cfg = ExperimentConfig::from_file(&config_path).map_err(err)?;
    let out = experiment::run_experiment(&cfg).map_err(err)?;
    to_pyobj(py, &out.metadata)
}

#[pymodule]
fn degseq_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDegreeSequence>()?;
    m.add_class::<PyCouplingParams>()?;
    m.add_function(wrap_pyfunction!(is_graphical, m)?)?;
    m.add_function(wrap_pyfunction!(p_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(q_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(coupled_law, m)?)?;
    m.add_function(wrap_pyfunction!(sample_gnd, m)?)?;
    m.add_function(wrap_pyfunction!(sample_gnw, m)?)?;
    m.add_function(wrap_pyfunction!(seq_approx_p, m)?)?;
    m.add_function(wrap_pyfunction!(run_coupling, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_graphs, m)?)?;
    m.add_function(wrap_pyfunction!(exact_edge_marginals, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
