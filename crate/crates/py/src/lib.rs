//! Python bindings: parameters, single workdays, sweeps, presets and the
//! validation suite.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use workday_cli::output;
use workday_core::{
    self as core, validation, MasterSeed, ModelParams, Observables, Preset, Quantity, RecordOptions, RunRecord,
    RunSeed, Stereotype, SweepSpec,
};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn stereotype(name: &str) -> PyResult<Stereotype> {
    match name {
        "extrovert" | "e" => Ok(Stereotype::Extrovert),
        "introvert" | "i" => Ok(Stereotype::Introvert),
        other => Err(value_error(format!(
            "unknown stereotype {other:?} (expected 'extrovert' or 'introvert')"
        ))),
    }
}

type Row = BTreeMap<&'static str, Option<f64>>;

fn observables(obs: &Observables) -> Row {
    Quantity::ALL.into_iter().map(|q| (q.column(), obs.get(q))).collect()
}

/// Model parameters. `eta` sets the extrovert count as `round(eta * n_agents)`.
#[pyclass(name = "ModelParams", module = "workday", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyModelParams {
    inner: ModelParams,
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (n_agents=100, eta=0.5, horizon=480, max_duration=20, contact_rate=2.0,
                        tau_extrovert=1.0, tau_introvert=5.0, motivation_cap=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        n_agents: u32,
        eta: f64,
        horizon: u32,
        max_duration: u32,
        contact_rate: f64,
        tau_extrovert: f64,
        tau_introvert: f64,
        motivation_cap: Option<u32>,
    ) -> PyResult<Self> {
        let base = ModelParams {
            n_agents,
            max_duration,
            contact_rate,
            tau_extrovert,
            tau_introvert,
            ..ModelParams::default()
        }
        .with_horizon(horizon);
        let mut inner = base.with_eta(eta).map_err(value_error)?;
        if let Some(cap) = motivation_cap {
            inner.motivation_cap = cap;
        }
        inner.validate().map_err(value_error)?;
        Ok(Self { inner })
    }

    #[getter]
    fn n_agents(&self) -> u32 {
        self.inner.n_agents
    }
    #[getter]
    fn n_extroverts(&self) -> u32 {
        self.inner.n_extroverts
    }
    #[getter]
    fn n_introverts(&self) -> u32 {
        self.inner.n_introverts()
    }
    /// Realized extrovert fraction.
    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta()
    }
    #[getter]
    fn horizon(&self) -> u32 {
        self.inner.horizon
    }
    #[getter]
    fn max_duration(&self) -> u32 {
        self.inner.max_duration
    }
    #[getter]
    fn contact_rate(&self) -> f64 {
        self.inner.contact_rate
    }
    #[getter]
    fn tau_extrovert(&self) -> f64 {
        self.inner.tau_extrovert
    }
    #[getter]
    fn tau_introvert(&self) -> f64 {
        self.inner.tau_introvert
    }
    #[getter]
    fn motivation_cap(&self) -> u32 {
        self.inner.motivation_cap
    }

    /// Motivation level above which the stereotype never instigates.
    fn threshold(&self, stereotype_name: &str) -> PyResult<f64> {
        Ok(self.inner.threshold(stereotype(stereotype_name)?))
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "ModelParams(n_agents={}, eta={}, horizon={}, max_duration={}, contact_rate={}, \
             tau_extrovert={}, tau_introvert={}, motivation_cap={})",
            p.n_agents,
            p.eta(),
            p.horizon,
            p.max_duration,
            p.contact_rate,
            p.tau_extrovert,
            p.tau_introvert,
            p.motivation_cap
        )
    }
}

/// Observables of one simulated workday.
#[pyclass(name = "RunRecord", module = "workday", frozen)]
struct PyRunRecord {
    inner: RunRecord,
}

#[pymethods]
impl PyRunRecord {
    /// Minutes simulated.
    #[getter]
    fn time(&self) -> u32 {
        self.inner.time()
    }

    /// End-of-day observables keyed by column name; absent subgroups are None.
    fn end(&self) -> Row {
        observables(self.inner.end())
    }

    /// Integer cumulative productivity per agent.
    fn cumulative_sums(&self) -> Vec<u64> {
        self.inner.cumulative_sums().to_vec()
    }

    /// Per-minute observables for t = 1..=T, or None if not recorded.
    fn series(&self) -> Option<Vec<Row>> {
        self.inner.series().map(|s| s.iter().map(observables).collect())
    }

    /// Per-minute `(t, L, pi, talking)` samples keyed by agent id, or None.
    #[allow(clippy::type_complexity)]
    fn trace(&self) -> Option<BTreeMap<usize, (String, Vec<(u32, u32, f64, bool)>)>> {
        self.inner.trace().map(|traces| {
            traces
                .iter()
                .map(|t| {
                    let samples = t.samples.iter().map(|s| (s.t, s.motivation, s.pi, s.talking)).collect();
                    (t.id, (t.stereotype.as_str().to_string(), samples))
                })
                .collect()
        })
    }
}

/// Ensemble results of a sweep, one row per grid point.
#[pyclass(name = "SweepResult", module = "workday", frozen)]
struct PySweepResult {
    inner: core::SweepResult,
}

#[pymethods]
impl PySweepResult {
    fn __len__(&self) -> usize {
        self.inner.points.len()
    }

    /// Rows sorted by `(D, q, eta)`: grid keys plus `<column>_mean` and
    /// `<column>_se` entries (None for absent subgroups).
    fn rows(&self) -> Vec<BTreeMap<String, Option<f64>>> {
        self.inner
            .sorted()
            .into_iter()
            .map(|p| {
                let mut row = BTreeMap::new();
                let params = &p.point.params;
                row.insert("eta".to_string(), Some(params.eta()));
                row.insert("q".to_string(), Some(params.contact_rate));
                row.insert("D".to_string(), Some(f64::from(params.max_duration)));
                row.insert("N".to_string(), Some(f64::from(params.n_agents)));
                row.insert("runs".to_string(), Some(p.stats.n_runs as f64));
                for q in Quantity::ALL {
                    let e = p.stats.get(q);
                    row.insert(format!("{}_mean", q.column()), e.map(|e| e.mean));
                    row.insert(format!("{}_se", q.column()), e.map(|e| e.stderr));
                }
                row
            })
            .collect()
    }

    /// The end-of-day CSV exactly as the command-line tool writes it.
    fn to_csv(&self) -> String {
        output::end_of_day_csv(&self.inner)
    }
}

/// Probability that a free agent tries to start a conversation.
#[pyfunction]
fn instigation_probability(stereotype_name: &str, motivation: u32, params: PyRef<'_, PyModelParams>) -> PyResult<f64> {
    Ok(core::instigation_probability(
        stereotype(stereotype_name)?,
        motivation,
        &params.inner,
    ))
}

/// Seed of run `run_index` at grid point `grid_index` under `master`.
#[pyfunction]
fn derive_run_seed(master: u64, grid_index: u64, run_index: u64) -> u64 {
    core::derive_run_seed(MasterSeed(master), grid_index, run_index).0
}

/// Simulates one workday.
#[pyfunction]
#[pyo3(signature = (params, seed, series=false, trace=false))]
fn run_day(
    py: Python<'_>,
    params: PyRef<'_, PyModelParams>,
    seed: u64,
    series: bool,
    trace: bool,
) -> PyResult<PyRunRecord> {
    let p = params.inner;
    let record = py
        .detach(|| core::run_day(&p, RunSeed(seed), RecordOptions { series, trace }))
        .map_err(value_error)?;
    Ok(PyRunRecord { inner: record })
}

fn run(py: Python<'_>, spec: SweepSpec, workers: usize) -> PyResult<PySweepResult> {
    let inner = py.detach(|| core::run_sweep(&spec, workers)).map_err(value_error)?;
    Ok(PySweepResult { inner })
}

/// Runs ensembles over the `eta x q x D` grid.
#[pyfunction]
#[pyo3(signature = (eta_grid, q_grid, d_grid=None, runs=1000, seed=0, base=None, series=false, workers=0))]
#[allow(clippy::too_many_arguments)]
fn run_sweep(
    py: Python<'_>,
    eta_grid: Vec<f64>,
    q_grid: Vec<f64>,
    d_grid: Option<Vec<u32>>,
    runs: u32,
    seed: u64,
    base: Option<PyRef<'_, PyModelParams>>,
    series: bool,
    workers: usize,
) -> PyResult<PySweepResult> {
    let spec = SweepSpec {
        base: base.map(|b| b.inner).unwrap_or_default(),
        eta_grid,
        q_grid,
        d_grid,
        runs_per_point: runs,
        master_seed: MasterSeed(seed),
        retain_series: series,
        trace_agents: false,
    };
    run(py, spec, workers)
}

/// Runs a figure preset (`fig1`..`fig5`, `long_talks`).
#[pyfunction]
#[pyo3(signature = (name, seed=0, runs=None, workers=0))]
fn run_preset(py: Python<'_>, name: &str, seed: u64, runs: Option<u32>, workers: usize) -> PyResult<PySweepResult> {
    let which: Preset = name.parse().map_err(value_error)?;
    let mut spec = core::preset(which);
    spec.master_seed = MasterSeed(seed);
    if let Some(r) = runs {
        spec.runs_per_point = r;
    }
    run(py, spec, workers)
}

/// Runs the oracle and invariant suite; returns `(passed, report)`.
#[pyfunction]
#[pyo3(signature = (seed=0))]
fn validate(py: Python<'_>, seed: u64) -> PyResult<(bool, String)> {
    let (ok, report) = py.detach(|| {
        let mut out = Vec::new();
        let ok = validation::run_suite(MasterSeed(seed), &mut out);
        (ok, out)
    });
    let ok = ok.map_err(value_error)?;
    Ok((ok, String::from_utf8_lossy(&report).into_owned()))
}

#[pymodule]
fn workday(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyRunRecord>()?;
    m.add_class::<PySweepResult>()?;
    m.add_function(wrap_pyfunction!(instigation_probability, m)?)?;
    m.add_function(wrap_pyfunction!(derive_run_seed, m)?)?;
    m.add_function(wrap_pyfunction!(run_day, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(run_preset, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add("PRESETS", Preset::ALL.iter().map(|p| p.name()).collect::<Vec<_>>())?;
    Ok(())
}
