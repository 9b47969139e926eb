//! Missions, the execution engine, traces, and metrics.

pub mod abort_study;
pub mod engine;
pub mod metrics;
pub mod rng;
pub mod trace;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::MissionError;
use crate::graph::{AisleGraph, VertexId};
use crate::task::{ClassSet, Task, TaskBoard};

pub use engine::{execute, ExecutionError, Violation};
pub use metrics::{check_invariants, compute_metrics, curve, CurvePoint, Metrics};
pub use rng::{Purpose, RandomSource};
pub use trace::{Event, MissionTrace, TraceHeader};

/// Per-trip budgets, restored at every base-station visit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    /// Resource for tasks, `P0`.
    pub resource: f64,
    /// Energy for travel, `T0`.
    pub energy: f64,
}

impl Budgets {
    pub fn new(resource: f64, energy: f64) -> Result<Self, MissionError> {
        let ok = |x: f64| x >= 0.0 && x.is_finite();
        if !ok(resource) || !ok(energy) {
            return Err(MissionError::Budget);
        }
        Ok(Self { resource, energy })
    }
}

/// A fully specified mission: graph, classes, tasks with hidden costs, and
/// budgets. All robots deploy from `deploy`.
#[derive(Debug, Clone)]
pub struct Mission {
    pub graph: Arc<AisleGraph>,
    pub classes: ClassSet,
    pub tasks: Vec<Task>,
    pub budgets: Budgets,
    pub deploy: VertexId,
}

impl Mission {
    pub fn new(
        graph: Arc<AisleGraph>,
        classes: ClassSet,
        tasks: Vec<Task>,
        budgets: Budgets,
        deploy: Option<VertexId>,
    ) -> Result<Self, MissionError> {
        Budgets::new(budgets.resource, budgets.energy)?;
        let deploy = deploy.unwrap_or(graph.bases()[0]);
        if !graph.is_base(deploy) {
            return Err(MissionError::DeployNotBase(deploy));
        }
        TaskBoard::new(&graph, &classes, tasks.clone())?;
        Ok(Self {
            graph,
            classes,
            tasks,
            budgets,
            deploy,
        })
    }

    /// Sum of `mu(level) * actual_cost` over all tasks.
    pub fn ground_truth_gain(&self) -> f64 {
        self.tasks
            .iter()
            .map(|t| {
                self.classes
                    .get(t.initial_level)
                    .map_or(0.0, |c| c.gain_ratio)
                    * t.actual_cost
            })
            .sum()
    }

    pub fn board(&self) -> TaskBoard {
        TaskBoard::new(&self.graph, &self.classes, self.tasks.clone())
            .expect("validated at construction")
    }
}

/// Recipe for a random mission.
#[derive(Debug, Clone)]
pub struct MissionSpec {
    pub graph: Arc<AisleGraph>,
    pub classes: ClassSet,
    pub budgets: Budgets,
    pub task_count: usize,
    /// Share of tasks per class, in class order. Empty means equal shares.
    pub proportions: Vec<f64>,
    pub deploy: Option<VertexId>,
}

/// Split `total` into integer counts proportional to `weights`
/// (largest remainder, ties to the earlier entry).
pub fn apportion(total: usize, weights: &[f64]) -> Result<Vec<usize>, MissionError> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) || !(sum > 0.0)
    {
        return Err(MissionError::Proportions);
    }
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut left = total - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for i in order {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    Ok(counts)
}

/// Draw task locations uniformly without replacement among interior
/// vertices and costs from the exponential distribution of each level.
pub fn generate_mission<R: Rng + ?Sized>(
    spec: &MissionSpec,
    rng: &mut R,
) -> Result<Mission, MissionError> {
    let g = &spec.graph;
    let (m, n) = (g.rows(), g.interior_cols());
    let available = m * n;
    if spec.task_count > available {
        return Err(MissionError::TooManyTasks {
            requested: spec.task_count,
            available,
        });
    }
    let weights = if spec.proportions.is_empty() {
        vec![1.0; spec.classes.len()]
    } else if spec.proportions.len() == spec.classes.len() {
        spec.proportions.clone()
    } else {
        return Err(MissionError::Proportions);
    };
    let counts = apportion(spec.task_count, &weights)?;
    let cells = sample(rng, available, spec.task_count).into_vec();
    let mut tasks = Vec::with_capacity(spec.task_count);
    let mut cell = cells.into_iter();
    for (class, &count) in spec.classes.iter().zip(&counts) {
        for idx in cell.by_ref().take(count) {
            let vertex = VertexId::new(idx / n + 1, idx % n + 1);
            let draw: f64 = Exp1.sample(rng);
            tasks.push(Task::new(vertex, class.level, draw * class.mean_cost));
        }
    }
    Mission::new(
        g.clone(),
        spec.classes.clone(),
        tasks,
        spec.budgets,
        spec.deploy,
    )
}

/// Planner selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PlannerKind {
    #[serde(rename = "nbap")]
    Nbap,
    #[serde(rename = "nlm")]
    NaiveLawnmower,
    #[serde(rename = "ilm")]
    InformedLawnmower,
    #[serde(rename = "sgpr")]
    Sgpr,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 4] = [
        PlannerKind::Nbap,
        PlannerKind::NaiveLawnmower,
        PlannerKind::InformedLawnmower,
        PlannerKind::Sgpr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::Nbap => "nbap",
            PlannerKind::NaiveLawnmower => "nlm",
            PlannerKind::InformedLawnmower => "ilm",
            PlannerKind::Sgpr => "sgpr",
        }
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlannerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "nbap" => Ok(PlannerKind::Nbap),
            "nlm" => Ok(PlannerKind::NaiveLawnmower),
            "ilm" => Ok(PlannerKind::InformedLawnmower),
            "sgpr" => Ok(PlannerKind::Sgpr),
            _ => Err(format!(
                "unknown planner {s:?} (expected nbap, nlm, ilm or sgpr)"
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task::PriorityClass;

    fn spec(count: usize) -> MissionSpec {
        let graph = AisleGraph::uniform(20, 15, 1.0, [VertexId::new(10, 0), VertexId::new(10, 16)])
            .unwrap();
        MissionSpec {
            graph: Arc::new(graph),
            classes: ClassSet::single(1.0, 2.0).unwrap(),
            budgets: Budgets::new(40.0, 80.0).unwrap(),
            task_count: count,
            proportions: vec![],
            deploy: None,
        }
    }

    #[test]
    fn apportion_exact_counts() {
        assert_eq!(apportion(225, &[0.5, 0.5]).unwrap(), vec![113, 112]);
        assert_eq!(apportion(10, &[1.0, 2.0, 1.0]).unwrap(), vec![3, 5, 2]);
        assert_eq!(apportion(0, &[1.0]).unwrap(), vec![0]);
        assert!(apportion(3, &[0.0]).is_err());
    }

    #[test]
    fn generation_is_seeded_and_complete() {
        let src = RandomSource::new(7);
        let a = generate_mission(&spec(225), &mut src.stream(Purpose::Mission, 0, 0)).unwrap();
        let b = generate_mission(&spec(225), &mut src.stream(Purpose::Mission, 0, 0)).unwrap();
        assert_eq!(a.tasks, b.tasks);
        assert_eq!(a.tasks.len(), 225);
        assert_eq!(a.deploy, VertexId::new(10, 0));
        let empty = generate_mission(&spec(0), &mut src.stream(Purpose::Mission, 0, 0)).unwrap();
        assert_eq!(empty.ground_truth_gain(), 0.0);
        assert!(generate_mission(&spec(301), &mut src.stream(Purpose::Mission, 0, 0)).is_err());
    }

    #[test]
    fn level_mix_follows_proportions() {
        let mut s = spec(225);
        s.classes = ClassSet::new([
            PriorityClass::new(1, 1.0, 1.5),
            PriorityClass::new(2, 2.0, 2.0),
        ])
        .unwrap();
        s.proportions = vec![1.0, 3.0];
        let m =
            generate_mission(&s, &mut RandomSource::new(1).stream(Purpose::Mission, 0, 0)).unwrap();
        let high = m.tasks.iter().filter(|t| t.level == 2).count();
        assert_eq!(high, 169);
    }

    #[test]
    fn planner_names_round_trip() {
        for p in PlannerKind::ALL {
            assert_eq!(p.name().parse::<PlannerKind>().unwrap(), p);
        }
        assert_eq!("NBA-P".parse::<PlannerKind>().unwrap(), PlannerKind::Nbap);
        assert!("astar".parse::<PlannerKind>().is_err());
    }
}
