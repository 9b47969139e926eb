//! Scenario files (TOML) and the built-in presets.
//!
//! A mission scenario names a graph, budgets, priority classes and a task
//! source; an abort-rate scenario has an `[abort_study]` or `[abort_grid]`
//! table instead. See the README for the full grammar.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;
use crate::field::{field_graph, field_tasks, FieldGrid};
use crate::graph::{AisleGraph, EdgeCosts, VertexId};
use crate::sim::{
    generate_mission, Budgets, Mission, MissionSpec, PlannerKind, Purpose, RandomSource,
};
use crate::task::{ClassSet, PriorityClass, Task};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub rows: usize,
    /// Interior columns per row.
    pub cols: usize,
    #[serde(default = "one")]
    pub edge_cost: f64,
    /// Full cost table; overrides `edge_cost` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub costs: Option<EdgeCosts>,
    /// `[row, col]` pairs. Defaults to the middle row of both connector columns.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bases: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deploy: Option<[usize; 2]>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskEntry {
    pub row: usize,
    pub col: usize,
    pub level: u32,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskSource {
    /// Uniformly placed tasks with exponential costs, redrawn per trial.
    Random {
        count: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        proportions: Vec<f64>,
    },
    Explicit {
        list: Vec<TaskEntry>,
    },
    /// Grid file; relative paths are resolved against the scenario file.
    Field {
        grid: PathBuf,
        desired: f64,
        bands: Vec<f64>,
    },
    /// Generated grid, seeded by the scenario seed.
    SyntheticField {
        rows: usize,
        cols: usize,
        desired: f64,
        bands: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbortStudySpec {
    pub gain_ratios: Vec<f64>,
    pub budget_ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbortGridSpec {
    /// `[mu_1, mu_2]` pairs, one grid each.
    pub configs: Vec<[f64; 2]>,
    pub ratios_low: Vec<f64>,
    pub ratios_high: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one_usize")]
    pub trials: usize,
    #[serde(default = "one_usize")]
    pub robots: usize,
    #[serde(default = "default_planners")]
    pub planners: Vec<PlannerKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budgets: Option<Budgets>,
    #[serde(default = "default_classes")]
    pub classes: Vec<PriorityClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tasks: Option<TaskSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abort_study: Option<AbortStudySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abort_grid: Option<AbortGridSpec>,
}

fn one_usize() -> usize {
    1
}

fn default_planners() -> Vec<PlannerKind> {
    vec![PlannerKind::Nbap]
}

fn default_classes() -> Vec<PriorityClass> {
    vec![PriorityClass::new(1, 1.0, 1.0)]
}

/// What a scenario runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Mission,
    AbortStudy,
    AbortGrid,
}

pub const PRESETS: [(&str, &str); 5] = [
    ("table1_s1", include_str!("../presets/table1_s1.toml")),
    ("table1_s2", include_str!("../presets/table1_s2.toml")),
    ("fig6_left", include_str!("../presets/fig6_left.toml")),
    ("fig6_right", include_str!("../presets/fig6_right.toml")),
    ("field", include_str!("../presets/field.toml")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

pub fn preset(name: &str) -> Result<ScenarioSpec, ScenarioError> {
    let text = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| ScenarioError::UnknownPreset(name.to_string()))?;
    ScenarioSpec::from_toml(text, None)
}

pub fn load_scenario(path: &Path) -> Result<ScenarioSpec, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ScenarioSpec::from_toml(&text, path.parent())
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field,
        reason: reason.into(),
    }
}

impl ScenarioSpec {
    /// Parse and validate. Relative field-grid paths are resolved against
    /// `base_dir` when given.
    pub fn from_toml(text: &str, base_dir: Option<&Path>) -> Result<Self, ScenarioError> {
        let mut spec: ScenarioSpec =
            toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        if let (Some(TaskSource::Field { grid, .. }), Some(dir)) = (&mut spec.tasks, base_dir) {
            if grid.is_relative() {
                *grid = dir.join(&*grid);
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn kind(&self) -> ScenarioKind {
        if self.abort_study.is_some() {
            ScenarioKind::AbortStudy
        } else if self.abort_grid.is_some() {
            ScenarioKind::AbortGrid
        } else {
            ScenarioKind::Mission
        }
    }

    pub fn class_set(&self) -> Result<ClassSet, ScenarioError> {
        ClassSet::new(self.classes.iter().copied()).map_err(|e| invalid("classes", e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.robots == 0 {
            return Err(invalid("robots", "need at least one robot"));
        }
        if self.planners.is_empty() {
            return Err(invalid("planners", "list at least one planner"));
        }
        match self.kind() {
            ScenarioKind::AbortStudy => {
                let s = self.abort_study.as_ref().expect("kind checked");
                let ok = |v: &[f64]| !v.is_empty() && v.iter().all(|x| *x > 0.0 && x.is_finite());
                if !ok(&s.gain_ratios) {
                    return Err(invalid("abort_study.gain_ratios", "need positive values"));
                }
                if !ok(&s.budget_ratios) {
                    return Err(invalid("abort_study.budget_ratios", "need positive values"));
                }
                Ok(())
            }
            ScenarioKind::AbortGrid => {
                let s = self.abort_grid.as_ref().expect("kind checked");
                let ok = |v: &[f64]| !v.is_empty() && v.iter().all(|x| *x > 0.0 && x.is_finite());
                if !ok(&s.ratios_low) || !ok(&s.ratios_high) {
                    return Err(invalid("abort_grid", "ratios must be positive"));
                }
                if s.configs.is_empty() || s.configs.iter().any(|[a, b]| !(*a > 0.0 && a < b)) {
                    return Err(invalid(
                        "abort_grid.configs",
                        "each pair needs 0 < mu_1 < mu_2",
                    ));
                }
                Ok(())
            }
            ScenarioKind::Mission => {
                let budgets = self.budgets.ok_or(ScenarioError::Missing("budgets"))?;
                Budgets::new(budgets.resource, budgets.energy)
                    .map_err(|_| invalid("budgets", "budgets must be finite and nonnegative"))?;
                let tasks = self.tasks.as_ref().ok_or(ScenarioError::Missing("tasks"))?;
                match tasks {
                    TaskSource::Field { bands, .. } | TaskSource::SyntheticField { bands, .. } => {
                        if bands.is_empty() || bands.windows(2).any(|w| w[0] >= w[1]) {
                            return Err(invalid(
                                "tasks.bands",
                                "thresholds must be strictly increasing",
                            ));
                        }
                    }
                    _ => {
                        self.class_set()?;
                        self.graph.as_ref().ok_or(ScenarioError::Missing("graph"))?;
                    }
                }
                if let TaskSource::SyntheticField { .. } | TaskSource::Field { .. } = tasks {
                    // graph follows the grid, checked when the grid is read
                    return Ok(());
                }
                let graph = self.build_graph(None)?;
                if let TaskSource::Random { count, proportions } = tasks {
                    let available = graph.rows() * graph.interior_cols();
                    if *count > available {
                        return Err(invalid(
                            "tasks.count",
                            format!("{count} tasks on {available} vertices"),
                        ));
                    }
                    if !proportions.is_empty() && proportions.len() != self.classes.len() {
                        return Err(invalid("tasks.proportions", "one share per class"));
                    }
                }
                self.check_reach(&graph, budgets)
            }
        }
    }

    // every row must be workable from the deployment base on a full battery
    fn check_reach(&self, graph: &AisleGraph, budgets: Budgets) -> Result<(), ScenarioError> {
        let deploy = self.deploy_vertex(graph);
        if !graph.is_base(deploy) {
            return Err(invalid(
                "graph.deploy",
                format!("{deploy} is not a base station"),
            ));
        }
        let heading = graph
            .side_of(deploy)
            .map(|s| s.inward())
            .unwrap_or(crate::graph::Heading::Right);
        for row in 1..=graph.rows() {
            let need = graph.through_row_cost(deploy, heading, row);
            if need > budgets.energy {
                return Err(invalid(
                    "budgets.energy",
                    format!("row {row} needs {need} from the deployment base"),
                ));
            }
        }
        Ok(())
    }

    fn deploy_vertex(&self, graph: &AisleGraph) -> VertexId {
        self.graph
            .as_ref()
            .and_then(|g| g.deploy)
            .map(|[r, c]| VertexId::new(r, c))
            .unwrap_or(graph.bases()[0])
    }

    /// Graph from the `[graph]` table, or sized to `dims` for field sources.
    fn build_graph(&self, dims: Option<(usize, usize)>) -> Result<AisleGraph, ScenarioError> {
        let Some(spec) = &self.graph else {
            let (m, n) = dims.ok_or(ScenarioError::Missing("graph"))?;
            return field_graph(m, n).map_err(ScenarioError::from);
        };
        if let Some((m, n)) = dims {
            if (m, n) != (spec.rows, spec.cols) {
                return Err(invalid(
                    "graph",
                    format!("grid is {m}x{n} but graph is {}x{}", spec.rows, spec.cols),
                ));
            }
        }
        let (m, n) = (spec.rows, spec.cols);
        let costs = spec
            .costs
            .clone()
            .unwrap_or_else(|| EdgeCosts::uniform(m, n, spec.edge_cost));
        let bases: Vec<VertexId> = if spec.bases.is_empty() {
            let mid = (m / 2).max(1);
            vec![VertexId::new(mid, 0), VertexId::new(mid, n + 1)]
        } else {
            spec.bases
                .iter()
                .map(|[r, c]| VertexId::new(*r, *c))
                .collect()
        };
        AisleGraph::new(m, n, costs, bases).map_err(|e| invalid("graph", e.to_string()))
    }

    /// Source that yields the same mission for every trial.
    pub fn is_deterministic(&self) -> bool {
        !matches!(self.tasks, Some(TaskSource::Random { .. }))
    }

    /// Mission for one trial. Random sources draw from the trial's stream.
    pub fn mission(&self, trial: usize) -> Result<Mission, ScenarioError> {
        let budgets = self.budgets.ok_or(ScenarioError::Missing("budgets"))?;
        let source = RandomSource::new(self.seed);
        let (graph, classes, tasks) =
            match self.tasks.as_ref().ok_or(ScenarioError::Missing("tasks"))? {
                TaskSource::Random { count, proportions } => {
                    let graph = Arc::new(self.build_graph(None)?);
                    let deploy = Some(self.deploy_vertex(&graph));
                    let spec = MissionSpec {
                        graph,
                        classes: self.class_set()?,
                        budgets,
                        task_count: *count,
                        proportions: proportions.clone(),
                        deploy,
                    };
                    let mut rng = source.stream(Purpose::Mission, trial as u64, 0);
                    return Ok(generate_mission(&spec, &mut rng)?);
                }
                TaskSource::Explicit { list } => {
                    let graph = self.build_graph(None)?;
                    let tasks = list
                        .iter()
                        .map(|t| Task::new(VertexId::new(t.row, t.col), t.level, t.cost))
                        .collect();
                    (graph, self.class_set()?, tasks)
                }
                TaskSource::Field {
                    grid,
                    desired,
                    bands,
                } => {
                    let grid = FieldGrid::load(grid)?;
                    self.field_parts(&grid, *desired, bands)?
                }
                TaskSource::SyntheticField {
                    rows,
                    cols,
                    desired,
                    bands,
                } => {
                    let mut rng = source.stream(Purpose::Field, 0, 0);
                    let grid = FieldGrid::synthetic(*rows, *cols, *desired, &mut rng)?;
                    self.field_parts(&grid, *desired, bands)?
                }
            };
        let deploy = Some(self.deploy_vertex(&graph));
        Ok(Mission::new(
            Arc::new(graph),
            classes,
            tasks,
            budgets,
            deploy,
        )?)
    }

    fn field_parts(
        &self,
        grid: &FieldGrid,
        desired: f64,
        bands: &[f64],
    ) -> Result<(AisleGraph, ClassSet, Vec<Task>), ScenarioError> {
        let ratios: Vec<f64> = self.classes.iter().map(|c| c.gain_ratio).collect();
        let custom = self.classes != default_classes();
        let (classes, tasks) =
            field_tasks(grid, desired, bands, custom.then_some(ratios.as_slice()))?;
        let graph = self.build_graph(Some((grid.rows(), grid.cols())))?;
        if let Some(b) = self.budgets {
            self.check_reach(&graph, b)?;
        }
        Ok((graph, classes, tasks))
    }
}

/// Scenario that replays a fixed mission, e.g. one read from a field grid.
pub fn explicit_scenario(name: &str, mission: &Mission) -> ScenarioSpec {
    let g = &mission.graph;
    ScenarioSpec {
        name: name.to_string(),
        seed: 0,
        trials: 1,
        robots: 1,
        planners: default_planners(),
        graph: Some(GraphSpec {
            rows: g.rows(),
            cols: g.interior_cols(),
            edge_cost: 1.0,
            costs: Some(g.costs().clone()),
            bases: g.bases().iter().map(|b| [b.row, b.col]).collect(),
            deploy: Some([mission.deploy.row, mission.deploy.col]),
        }),
        budgets: Some(mission.budgets),
        classes: mission.classes.as_slice().to_vec(),
        tasks: Some(TaskSource::Explicit {
            list: mission
                .tasks
                .iter()
                .map(|t| TaskEntry {
                    row: t.vertex.row,
                    col: t.vertex.col,
                    level: t.initial_level,
                    cost: t.actual_cost,
                })
                .collect(),
        }),
        abort_study: None,
        abort_grid: None,
    }
}
