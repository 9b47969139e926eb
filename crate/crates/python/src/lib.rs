//! Python bindings for the `nbap` planner and simulator.
//!
//! Vertices cross the boundary as `(row, col)` tuples, headings as
//! `"left"` / `"right"`, planners by their CLI names. Errors surface as
//! `ValueError`, invariant violations as `RuntimeError`.

use std::path::PathBuf;
use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use nbap::experiment::{run_experiment, run_scenario, OutputOptions};
use nbap::sim::{
    abort_study::abort_rate as core_abort_rate, check_invariants, compute_metrics,
    generate_mission, Budgets, MissionSpec, Purpose, RandomSource,
};
use nbap::stopping::{boundary as core_boundary, is_level_feasible};
use nbap::{AisleGraph, ClassSet, Heading, MissionTrace, PlannerKind, Task, TripState, VertexId};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn vertex((row, col): (usize, usize)) -> VertexId {
    VertexId::new(row, col)
}

type Route = (f64, Vec<(usize, usize)>);

fn pair(v: VertexId) -> (usize, usize) {
    (v.row, v.col)
}

fn heading(name: &str) -> PyResult<Heading> {
    match name {
        "left" => Ok(Heading::Left),
        "right" => Ok(Heading::Right),
        _ => Err(value_err(format!(
            "heading must be 'left' or 'right', got {name:?}"
        ))),
    }
}

fn planner(name: &str) -> PyResult<PlannerKind> {
    name.parse().map_err(value_err)
}

/// Aisle graph with uniform edge cost and base stations on the connectors.
#[pyclass(name = "AisleGraph", module = "nbap_py", frozen)]
struct PyGraph {
    inner: Arc<AisleGraph>,
}

#[pymethods]
impl PyGraph {
    /// Bases default to the middle row on both connector columns.
    #[new]
    #[pyo3(signature = (rows, cols, edge_cost = 1.0, bases = None))]
    fn new(
        rows: usize,
        cols: usize,
        edge_cost: f64,
        bases: Option<Vec<(usize, usize)>>,
    ) -> PyResult<Self> {
        let bases = bases.unwrap_or_else(|| {
            let mid = rows.div_ceil(2).max(1);
            vec![(mid, 0), (mid, cols + 1)]
        });
        let g = AisleGraph::uniform(rows, cols, edge_cost, bases.into_iter().map(vertex))
            .map_err(value_err)?;
        Ok(Self { inner: Arc::new(g) })
    }

    #[getter]
    fn rows(&self) -> usize {
        self.inner.rows()
    }

    #[getter]
    fn cols(&self) -> usize {
        self.inner.interior_cols()
    }

    #[getter]
    fn bases(&self) -> Vec<(usize, usize)> {
        self.inner.bases().iter().copied().map(pair).collect()
    }

    fn neighbors(&self, v: (usize, usize)) -> PyResult<Vec<(usize, usize)>> {
        let v = vertex(v);
        if !self.inner.contains(v) {
            return Err(value_err(format!("{v} is not in the graph")));
        }
        Ok(self.inner.neighbors(v).into_iter().map(pair).collect())
    }

    fn legal_moves(
        &self,
        pose: (usize, usize),
        heading_name: &str,
    ) -> PyResult<Vec<(usize, usize)>> {
        Ok(self
            .inner
            .legal_moves(vertex(pose), heading(heading_name)?)
            .into_iter()
            .map(pair)
            .collect())
    }

    /// Travel cost from the pose to the start of `row`.
    fn approach_cost(&self, pose: (usize, usize), heading_name: &str, row: usize) -> PyResult<f64> {
        Ok(self
            .inner
            .t_alpha(vertex(pose), heading(heading_name)?, row))
    }

    /// Cost of traversing `row` end to end.
    fn row_cost(&self, row: usize) -> PyResult<f64> {
        self.inner.t_beta(row).map_err(value_err)
    }

    /// Approach, full traversal of `row`, and return to a base.
    fn through_row_cost(
        &self,
        pose: (usize, usize),
        heading_name: &str,
        row: usize,
    ) -> PyResult<f64> {
        Ok(self
            .inner
            .through_row_cost(vertex(pose), heading(heading_name)?, row))
    }

    /// `(cost, path)` of the cheapest legal walk to a base, or `None`.
    fn route_to_base(&self, pose: (usize, usize), heading_name: &str) -> PyResult<Option<Route>> {
        let r = self
            .inner
            .route_to_base(vertex(pose), heading(heading_name)?);
        Ok(r.map(|(c, p)| (c, p.into_iter().map(pair).collect())))
    }

    fn __repr__(&self) -> String {
        format!(
            "AisleGraph(rows={}, cols={})",
            self.inner.rows(),
            self.inner.interior_cols()
        )
    }
}

/// Optimal-stopping boundary `g(p)` for a class with the given gain ratio
/// and mean cost.
#[pyfunction]
fn boundary(p: f64, gain_ratio: f64, mean_cost: f64) -> PyResult<f64> {
    core_boundary(p, &nbap::PriorityClass::new(1, gain_ratio, mean_cost)).map_err(value_err)
}

/// Whether continuing at this class is worthwhile with `p` resource left
/// and `q` gain collected on the current trip.
#[pyfunction]
fn should_continue(p: f64, q: f64, gain_ratio: f64, mean_cost: f64) -> bool {
    is_level_feasible(
        TripState::new(p, q),
        &nbap::PriorityClass::new(1, gain_ratio, mean_cost),
    )
}

fn class_set(classes: Vec<(u32, f64, f64)>) -> PyResult<ClassSet> {
    ClassSet::new(
        classes
            .into_iter()
            .map(|(l, mu, w)| nbap::PriorityClass::new(l, mu, w)),
    )
    .map_err(value_err)
}

/// A mission: graph, priority classes, tasks with hidden costs, budgets.
#[pyclass(name = "Mission", module = "nbap_py", frozen)]
struct PyMission {
    inner: nbap::Mission,
}

#[pymethods]
impl PyMission {
    /// Explicit mission. `classes` holds `(level, gain_ratio, mean_cost)`,
    /// `tasks` holds `(row, col, level, cost)`.
    #[new]
    #[pyo3(signature = (graph, classes, tasks, resource, energy, deploy = None))]
    fn new(
        graph: &PyGraph,
        classes: Vec<(u32, f64, f64)>,
        tasks: Vec<(usize, usize, u32, f64)>,
        resource: f64,
        energy: f64,
        deploy: Option<(usize, usize)>,
    ) -> PyResult<Self> {
        let tasks = tasks
            .into_iter()
            .map(|(r, c, l, w)| Task::new(VertexId::new(r, c), l, w))
            .collect();
        let budgets = Budgets::new(resource, energy).map_err(value_err)?;
        let m = nbap::Mission::new(
            graph.inner.clone(),
            class_set(classes)?,
            tasks,
            budgets,
            deploy.map(vertex),
        )
        .map_err(value_err)?;
        Ok(Self { inner: m })
    }

    /// Random mission with exponentially distributed task costs.
    #[staticmethod]
    #[pyo3(signature = (graph, classes, task_count, resource, energy, seed, trial = 0, proportions = vec![]))]
    #[allow(clippy::too_many_arguments)]
    fn random(
        graph: &PyGraph,
        classes: Vec<(u32, f64, f64)>,
        task_count: usize,
        resource: f64,
        energy: f64,
        seed: u64,
        trial: u64,
        proportions: Vec<f64>,
    ) -> PyResult<Self> {
        let spec = MissionSpec {
            graph: graph.inner.clone(),
            classes: class_set(classes)?,
            budgets: Budgets::new(resource, energy).map_err(value_err)?,
            task_count,
            proportions,
            deploy: None,
        };
        let mut rng = RandomSource::new(seed).stream(Purpose::Mission, trial, 0);
        Ok(Self {
            inner: generate_mission(&spec, &mut rng).map_err(value_err)?,
        })
    }

    /// Mission from a sensor grid CSV; cells below `desired` hold tasks.
    #[staticmethod]
    #[pyo3(signature = (path, desired, bands = vec![0.0]))]
    fn from_field_grid(path: PathBuf, desired: f64, bands: Vec<f64>) -> PyResult<Self> {
        let m = nbap::field::ingest_field_grid(&path, desired, &bands).map_err(value_err)?;
        Ok(Self { inner: m })
    }

    #[getter]
    fn graph(&self) -> PyGraph {
        PyGraph {
            inner: self.inner.graph.clone(),
        }
    }

    /// `(row, col, level, cost)` for every task.
    #[getter]
    fn tasks(&self) -> Vec<(usize, usize, u32, f64)> {
        self.inner
            .tasks
            .iter()
            .map(|t| (t.vertex.row, t.vertex.col, t.initial_level, t.actual_cost))
            .collect()
    }

    #[getter]
    fn classes(&self) -> Vec<(u32, f64, f64)> {
        self.inner
            .classes
            .iter()
            .map(|c| (c.level, c.gain_ratio, c.mean_cost))
            .collect()
    }

    #[getter]
    fn ground_truth_gain(&self) -> f64 {
        self.inner.ground_truth_gain()
    }

    fn __len__(&self) -> usize {
        self.inner.tasks.len()
    }

    /// Run the mission with `robots` robots and return its trace.
    /// Raises `RuntimeError` if an execution invariant breaks.
    #[pyo3(signature = (planner_name = "nbap", robots = 1))]
    fn execute(&self, py: Python<'_>, planner_name: &str, robots: usize) -> PyResult<PyTrace> {
        let kind = planner(planner_name)?;
        let mission = &self.inner;
        let trace = py
            .detach(|| nbap::sim::execute(mission, kind, robots))
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        Ok(PyTrace { inner: trace })
    }

    /// Raise `RuntimeError` unless `trace` is a valid run of this mission.
    fn check(&self, trace: &PyTrace) -> PyResult<()> {
        check_invariants(&trace.inner, &self.inner)
            .map_err(|v| PyRuntimeError::new_err(v.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "Mission(rows={}, cols={}, tasks={}, resource={}, energy={})",
            self.inner.graph.rows(),
            self.inner.graph.interior_cols(),
            self.inner.tasks.len(),
            self.inner.budgets.resource,
            self.inner.budgets.energy
        )
    }
}

/// Event log of one mission run.
#[pyclass(name = "Trace", module = "nbap_py", frozen)]
struct PyTrace {
    inner: MissionTrace,
}

#[pymethods]
impl PyTrace {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: MissionTrace::parse(text).map_err(value_err)?,
        })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn planner(&self) -> String {
        self.inner.header.planner.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.events.len()
    }

    /// Metrics as a dict: rv, wv, visited, waste, path_length, gain,
    /// completed, aborts.
    fn metrics<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let m = compute_metrics(&self.inner);
        let d = PyDict::new(py);
        d.set_item("rv", m.rv_ratio)?;
        d.set_item("wv", m.wv_ratio)?;
        d.set_item("visited", m.visited)?;
        d.set_item("waste", m.total_waste)?;
        d.set_item("path_length", m.path_length)?;
        d.set_item("gain", m.gain)?;
        d.set_item("completed", m.completed)?;
        d.set_item("aborts", m.aborts)?;
        Ok(d)
    }
}

/// Scenario file contents: graph, budgets, classes, task source, trials.
#[pyclass(name = "Scenario", module = "nbap_py")]
struct PyScenario {
    inner: nbap::scenario::ScenarioSpec,
}

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        Ok(Self {
            inner: nbap::scenario::preset(name).map_err(value_err)?,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: nbap::scenario::load_scenario(&path).map_err(value_err)?,
        })
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: nbap::scenario::ScenarioSpec::from_toml(text, None).map_err(value_err)?,
        })
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml()
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[setter]
    fn set_seed(&mut self, seed: u64) {
        self.inner.seed = seed;
    }

    #[getter]
    fn trials(&self) -> usize {
        self.inner.trials
    }

    #[setter]
    fn set_trials(&mut self, trials: usize) {
        self.inner.trials = trials;
    }

    #[getter]
    fn robots(&self) -> usize {
        self.inner.robots
    }

    #[setter]
    fn set_robots(&mut self, robots: usize) {
        self.inner.robots = robots;
    }

    #[getter]
    fn planners(&self) -> Vec<&'static str> {
        self.inner.planners.iter().map(|p| p.name()).collect()
    }

    #[setter]
    fn set_planners(&mut self, names: Vec<String>) -> PyResult<()> {
        self.inner.planners = names.iter().map(|n| planner(n)).collect::<PyResult<_>>()?;
        Ok(())
    }

    /// The mission for trial `trial`.
    #[pyo3(signature = (trial = 0))]
    fn mission(&self, trial: usize) -> PyResult<PyMission> {
        Ok(PyMission {
            inner: self.inner.mission(trial).map_err(value_err)?,
        })
    }

    /// Run every trial and return aggregate rows (mission scenarios) or
    /// abort-rate points (abort studies) as a list of dicts.
    fn run<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let spec = &self.inner;
        let res = py
            .detach(|| run_scenario(spec))
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        let mut rows = Vec::new();
        for a in &res.aggregates {
            let d = PyDict::new(py);
            d.set_item("planner", a.planner.name())?;
            d.set_item("trials", a.trials)?;
            d.set_item("rv_mean", a.rv_mean)?;
            d.set_item("rv_std", a.rv_std)?;
            d.set_item("wv_mean", a.wv_mean)?;
            d.set_item("wv_std", a.wv_std)?;
            d.set_item("visited_mean", a.visited_mean)?;
            d.set_item("visited_std", a.visited_std)?;
            d.set_item("waste_mean", a.waste_mean)?;
            d.set_item("path_length_mean", a.path_length_mean)?;
            rows.push(d);
        }
        for p in &res.abort_points {
            let d = PyDict::new(py);
            d.set_item("ratios", p.ratios.clone())?;
            d.set_item("gain_ratios", p.gain_ratios.clone())?;
            d.set_item("trials", p.trials)?;
            d.set_item("aborts", p.aborts)?;
            d.set_item("rate", p.rate)?;
            rows.push(d);
        }
        Ok(rows)
    }

    /// Run and write the CSV outputs into `out_dir`; returns the file paths.
    #[pyo3(signature = (out_dir, traces = false))]
    fn write(&self, py: Python<'_>, out_dir: PathBuf, traces: bool) -> PyResult<Vec<PathBuf>> {
        let spec = &self.inner;
        let (_, files) = py
            .detach(|| run_experiment(spec, &out_dir, OutputOptions { traces }))
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        Ok(files)
    }
}

#[pyfunction]
fn preset_names() -> Vec<&'static str> {
    nbap::scenario::preset_names()
}

/// Fraction of `trials` single trips that end in an abort. `classes` holds
/// `(level, gain_ratio, mean_cost)`.
#[pyfunction]
#[pyo3(signature = (classes, budget, trials, seed = 0))]
fn abort_rate(
    py: Python<'_>,
    classes: Vec<(u32, f64, f64)>,
    budget: f64,
    trials: usize,
    seed: u64,
) -> PyResult<f64> {
    let cs = class_set(classes)?;
    Ok(py
        .detach(|| core_abort_rate(&cs, budget, trials, &RandomSource::new(seed)))
        .rate)
}

#[pymodule]
fn nbap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyMission>()?;
    m.add_class::<PyTrace>()?;
    m.add_class::<PyScenario>()?;
    m.add_function(wrap_pyfunction!(boundary, m)?)?;
    m.add_function(wrap_pyfunction!(should_continue, m)?)?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    m.add_function(wrap_pyfunction!(abort_rate, m)?)?;
    m.add("PLANNERS", PlannerKind::ALL.map(|p| p.name()).to_vec())?;
    Ok(())
}
