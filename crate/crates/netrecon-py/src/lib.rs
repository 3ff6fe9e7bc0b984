//! Python bindings for the measurement-model toolkit.
//!
//! Thin wrappers only: a [`Tally`] holds the same data the fitting engine
//! consumes, a [`Fit`] bundles point estimates with the edge posterior they
//! induce, and every method forwards to the library crate. Build with
//! `--features extension-module` to produce an importable module; the
//! default build links the system interpreter so `cargo test` treats the
//! crate like any other.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use netrecon::em::{self, EmConfig};
use netrecon::params::{ModelId, ModelParams};
use netrecon::synth::SynthSpec;
use netrecon::types::{
    MeasurementTally, ModeTallyEntry, MultimodalTally, NodeIndex, TallyData, TallyEntry,
};
use netrecon::{io, models, oracle, posterior};

fn raise(e: netrecon::Error) -> PyErr {
    match e.category() {
        "io" => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn bad_json(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(format!("bad JSON: {e}"))
}

fn checked_count(value: u64, what: &str) -> PyResult<u32> {
    u32::try_from(value).map_err(|_| PyValueError::new_err(format!("{what} count overflows u32")))
}

/// Aggregated pair measurements, single-source or per-mode.
#[pyclass(frozen)]
pub struct Tally {
    data: TallyData,
}

#[pymethods]
impl Tally {
    /// Builds a tally from `(i, j, trials, positives)` rows. Labels are
    /// interned in order of first appearance and repeated pairs accumulate.
    #[staticmethod]
    #[pyo3(signature = (rows, directed = false))]
    fn from_counts(rows: Vec<(String, String, u32, u32)>, directed: bool) -> PyResult<Self> {
        let mut index = NodeIndex::new();
        let mut cells: BTreeMap<(u32, u32), (u64, u64)> = BTreeMap::new();
        for (a, b, trials, positives) in &rows {
            let mut i = index.intern(a);
            let mut j = index.intern(b);
            if !directed && i > j {
                std::mem::swap(&mut i, &mut j);
            }
            let cell = cells.entry((i, j)).or_default();
            cell.0 += u64::from(*trials);
            cell.1 += u64::from(*positives);
        }
        let entries = cells
            .into_iter()
            .map(|((i, j), (trials, positives))| {
                Ok(TallyEntry {
                    i,
                    j,
                    trials: checked_count(trials, "trial")?,
                    positives: checked_count(positives, "positive")?,
                })
            })
            .collect::<PyResult<Vec<_>>>()?;
        let tally = MeasurementTally::from_entries(index, directed, entries).map_err(raise)?;
        Ok(Self {
            data: TallyData::Single(tally),
        })
    }

    /// Builds a directed multimodal tally from `(i, j, mode, trials,
    /// positives)` rows, where a row measures the potential edge from `j`
    /// to `i`. Modes are interned in order of first appearance.
    #[staticmethod]
    fn from_mode_counts(rows: Vec<(String, String, String, u32, u32)>) -> PyResult<Self> {
        let mut index = NodeIndex::new();
        let mut modes: Vec<String> = Vec::new();
        let mut cells: BTreeMap<(u32, u32), BTreeMap<usize, (u64, u64)>> = BTreeMap::new();
        for (a, b, mode, trials, positives) in &rows {
            let i = index.intern(a);
            let j = index.intern(b);
            let m = match modes.iter().position(|s| s == mode) {
                Some(m) => m,
                None => {
                    modes.push(mode.clone());
                    modes.len() - 1
                }
            };
            let cell = cells.entry((i, j)).or_default().entry(m).or_default();
            cell.0 += u64::from(*trials);
            cell.1 += u64::from(*positives);
        }
        let width = modes.len();
        let entries = cells
            .into_iter()
            .map(|((i, j), by_mode)| {
                let mut e = ModeTallyEntry {
                    i,
                    j,
                    trials: vec![0; width],
                    positives: vec![0; width],
                };
                for (m, (trials, positives)) in by_mode {
                    e.trials[m] = checked_count(trials, "trial")?;
                    e.positives[m] = checked_count(positives, "positive")?;
                }
                Ok(e)
            })
            .collect::<PyResult<Vec<_>>>()?;
        let tally = MultimodalTally::from_entries(index, modes, entries).map_err(raise)?;
        Ok(Self {
            data: TallyData::Modes(tally),
        })
    }

    /// Reads a tally file, accepting headerless square count matrices too.
    #[staticmethod]
    #[pyo3(signature = (path, directed = false))]
    fn read(path: PathBuf, directed: bool) -> PyResult<Self> {
        Ok(Self {
            data: io::read_tally_or_counts(&path, directed).map_err(raise)?,
        })
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        io::write_tally(&path, &self.data).map_err(raise)
    }

    #[getter]
    fn n(&self) -> usize {
        self.data.n()
    }

    #[getter]
    fn directed(&self) -> bool {
        self.data.directed()
    }

    fn nodes(&self) -> Vec<String> {
        self.data.index().labels().to_vec()
    }

    fn __repr__(&self) -> String {
        let kind = match &self.data {
            TallyData::Single(t) if t.directed() => "directed".to_string(),
            TallyData::Single(_) => "undirected".to_string(),
            TallyData::Modes(t) => format!("{} modes", t.modes().len()),
        };
        format!("Tally({} nodes, {kind})", self.data.n())
    }
}

/// A fitted model: point estimates plus the edge posterior they induce.
#[pyclass(frozen)]
pub struct Fit {
    model: ModelId,
    params: ModelParams,
    posterior: netrecon::EdgePosterior,
    objective: f64,
    trace: Vec<f64>,
    iterations: usize,
    converged: bool,
    restart: usize,
    notes: Vec<String>,
}

impl Fit {
    fn node_id(&self, label: &str) -> PyResult<u32> {
        self.posterior
            .index()
            .id(label)
            .ok_or_else(|| PyValueError::new_err(format!("unknown node label {label:?}")))
    }

    fn label(&self, id: u32) -> String {
        self.posterior.index().label(id).to_string()
    }
}

#[pymethods]
impl Fit {
    #[getter]
    fn model(&self) -> String {
        self.model.to_string()
    }

    #[getter]
    fn objective(&self) -> f64 {
        self.objective
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.iterations
    }

    #[getter]
    fn converged(&self) -> bool {
        self.converged
    }

    #[getter]
    fn restart(&self) -> usize {
        self.restart
    }

    /// Objective value after initialization and after every update.
    #[getter]
    fn trace(&self) -> Vec<f64> {
        self.trace.clone()
    }

    #[getter]
    fn notes(&self) -> Vec<String> {
        self.notes.clone()
    }

    /// Fitted parameters as pretty-printed JSON, tagged by model.
    fn params_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.params).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// Posterior probability that the pair holds at least one edge.
    fn edge_prob(&self, i: &str, j: &str) -> PyResult<f64> {
        Ok(self.posterior.edge_prob(self.node_id(i)?, self.node_id(j)?))
    }

    /// Measured pairs whose edge probability is at least `qmin`.
    #[pyo3(signature = (qmin = 0.01))]
    fn edges(&self, qmin: f64) -> Vec<(String, String, f64)> {
        self.posterior
            .stored()
            .filter(|&(_, _, q)| q >= qmin)
            .map(|(i, j, q)| (self.label(i), self.label(j), q))
            .collect()
    }

    /// Pairs whose edge probability exceeds `threshold`, with the most
    /// probable value of each.
    #[pyo3(signature = (threshold = 0.5))]
    fn map_edges(&self, threshold: f64) -> Vec<(String, String, u32)> {
        posterior::map_network(&self.posterior, threshold)
            .entries()
            .map(|(i, j, v)| (self.label(i), self.label(j), v))
            .collect()
    }

    /// Closed-form posterior mean and standard deviation of the mean degree.
    fn mean_degree(&self) -> (f64, f64) {
        let est = posterior::mean_degree(&self.posterior);
        (est.value, est.std_dev)
    }

    /// Monte Carlo mean and standard error of the mean degree over sampled
    /// networks; converges on `mean_degree` as `samples` grows.
    #[pyo3(signature = (samples, seed = 0))]
    fn sample_mean_degree(&self, samples: usize, seed: u64) -> PyResult<(f64, f64)> {
        let kind = self.posterior.kind();
        let est = posterior::estimate_functional(&self.posterior, samples, seed, |g| {
            posterior::network_mean_degree(kind, g)
        })
        .map_err(raise)?;
        Ok((est.mean, est.std_error))
    }

    fn __repr__(&self) -> String {
        format!(
            "Fit({}, objective {:.6}, {} iterations, converged {})",
            self.model, self.objective, self.iterations, self.converged
        )
    }
}

/// Fits `model` to `tally` by EM with seeded restarts.
#[pyfunction]
#[pyo3(signature = (tally, model, *, tol = 1e-8, max_iter = 10_000, restarts = 10, seed = 0, sparse = true, k_max = 3, edge_states = 3))]
#[allow(clippy::too_many_arguments)]
fn fit(
    tally: &Tally,
    model: &str,
    tol: f64,
    max_iter: usize,
    restarts: usize,
    seed: u64,
    sparse: bool,
    k_max: usize,
    edge_states: usize,
) -> PyResult<Fit> {
    let model: ModelId = model.parse().map_err(raise)?;
    let cfg = EmConfig {
        tol,
        max_iter,
        restarts,
        seed,
        sparse,
        k_max,
        edge_states,
    };
    let r = em::run_em(model, &tally.data, &cfg).map_err(raise)?;
    Ok(Fit {
        model,
        params: r.params,
        posterior: r.posterior,
        objective: r.objective,
        trace: r.trace,
        iterations: r.iterations,
        converged: r.converged,
        restart: r.restart,
        notes: r.notes,
    })
}

/// Posterior induced by fixed parameters (a single E-step), packaged like
/// a fit so the same queries apply.
#[pyfunction]
fn posterior_at(tally: &Tally, params_json: &str) -> PyResult<Fit> {
    let params: ModelParams = serde_json::from_str(params_json).map_err(bad_json)?;
    let post = em::estep(&params, &tally.data).map_err(raise)?;
    let objective = models::log_posterior_objective(&tally.data, &params).map_err(raise)?;
    Ok(Fit {
        model: params.model_id(),
        posterior: post,
        objective,
        trace: vec![objective],
        iterations: 0,
        converged: true,
        restart: 0,
        notes: Vec::new(),
        params,
    })
}

/// Exact log evidence by enumerating every network; feasible only for a
/// handful of nodes.
#[pyfunction]
fn log_evidence(tally: &Tally, params_json: &str) -> PyResult<f64> {
    let params: ModelParams = serde_json::from_str(params_json).map_err(bad_json)?;
    Ok(oracle::enumerate_posterior(&tally.data, &params)
        .map_err(raise)?
        .log_evidence)
}

/// Draws a network and a measurement tally from a generator spec given as
/// JSON, returning the tally and the planted adjacency entries.
#[pyfunction]
fn synth(spec_json: &str) -> PyResult<(Tally, Vec<(String, String, u32)>)> {
    let spec: SynthSpec = serde_json::from_str(spec_json).map_err(bad_json)?;
    let (network, data) = netrecon::synth::generate(&spec).map_err(raise)?;
    let edges = network
        .entries()
        .map(|(i, j, v)| {
            (
                data.index().label(i).to_string(),
                data.index().label(j).to_string(),
                v,
            )
        })
        .collect();
    Ok((Tally { data }, edges))
}

#[pymodule]
fn netrecon_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Tally>()?;
    m.add_class::<Fit>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(posterior_at, m)?)?;
    m.add_function(wrap_pyfunction!(log_evidence, m)?)?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    Ok(())
}
