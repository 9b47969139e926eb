//! Priority classes, tasks, and the pending-task board planners read from.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{ClassError, MissionError};
use crate::graph::{AisleGraph, Heading, VertexId};

/// Parameters of one priority level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorityClass {
    pub level: u32,
    /// Gain per unit of resource spent, `mu(s)`.
    pub gain_ratio: f64,
    /// Mean task cost `w_s`; costs are exponential with this mean.
    pub mean_cost: f64,
}

impl PriorityClass {
    pub fn new(level: u32, gain_ratio: f64, mean_cost: f64) -> Self {
        Self {
            level,
            gain_ratio,
            mean_cost,
        }
    }

    /// `lambda_s = 1 / w_s`.
    pub fn rate(&self) -> f64 {
        1.0 / self.mean_cost
    }
}

/// Priority classes sorted by level, with gain ratio strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassSet {
    classes: Vec<PriorityClass>,
}

impl ClassSet {
    pub fn new(classes: impl IntoIterator<Item = PriorityClass>) -> Result<Self, ClassError> {
        let mut classes: Vec<PriorityClass> = classes.into_iter().collect();
        if classes.is_empty() {
            return Err(ClassError::Empty);
        }
        classes.sort_by_key(|c| c.level);
        for (i, c) in classes.iter().enumerate() {
            if c.level == 0 {
                return Err(ClassError::ZeroLevel);
            }
            let ok = |x: f64| x > 0.0 && x.is_finite();
            if !ok(c.gain_ratio) || !ok(c.mean_cost) {
                return Err(ClassError::NonPositive { level: c.level });
            }
            if i > 0 {
                let prev = &classes[i - 1];
                if prev.level == c.level {
                    return Err(ClassError::DuplicateLevel(c.level));
                }
                if prev.gain_ratio >= c.gain_ratio {
                    return Err(ClassError::GainOrder { level: c.level });
                }
            }
        }
        Ok(Self { classes })
    }

    pub fn single(gain_ratio: f64, mean_cost: f64) -> Result<Self, ClassError> {
        Self::new([PriorityClass::new(1, gain_ratio, mean_cost)])
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn as_slice(&self) -> &[PriorityClass] {
        &self.classes
    }

    pub fn iter(&self) -> impl Iterator<Item = &PriorityClass> {
        self.classes.iter()
    }

    pub fn max_level(&self) -> u32 {
        self.classes.last().map_or(0, |c| c.level)
    }

    pub fn index_of(&self, level: u32) -> Option<usize> {
        self.classes.binary_search_by_key(&level, |c| c.level).ok()
    }

    pub fn get(&self, level: u32) -> Option<&PriorityClass> {
        self.index_of(level).map(|i| &self.classes[i])
    }

    /// Index of the highest class whose level is `<= level`.
    pub fn index_at_or_below(&self, level: u32) -> Option<usize> {
        self.classes.iter().rposition(|c| c.level <= level)
    }

    pub fn max_mean_cost(&self) -> f64 {
        self.classes.iter().map(|c| c.mean_cost).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskStatus {
    Pending,
    Completed,
}

/// A job bound to an interior vertex. `actual_cost` is ground truth and is
/// only revealed by attempting the task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub vertex: VertexId,
    /// Current level; set to 0 once completed.
    pub level: u32,
    /// Level assigned at mission creation, used for gain.
    pub initial_level: u32,
    pub actual_cost: f64,
    pub status: TaskStatus,
}

impl Task {
    pub fn new(vertex: VertexId, level: u32, actual_cost: f64) -> Self {
        Self {
            vertex,
            level,
            initial_level: level,
            actual_cost,
            status: TaskStatus::Pending,
        }
    }

    pub fn is_pending(&self) -> bool {
        self.status == TaskStatus::Pending
    }
}

/// Mutable task state of a running mission, indexed for fast queries by
/// level and row.
#[derive(Debug, Clone)]
pub struct TaskBoard {
    tasks: Vec<Task>,
    at_vertex: Vec<Option<usize>>,
    cols: usize,
    // pending[class][row - 1] = interior columns with a pending task
    pending: Vec<Vec<BTreeSet<usize>>>,
    pending_per_class: Vec<usize>,
    classes: ClassSet,
}

impl TaskBoard {
    pub fn new(
        graph: &AisleGraph,
        classes: &ClassSet,
        tasks: Vec<Task>,
    ) -> Result<Self, MissionError> {
        let cols = graph.interior_cols() + 2;
        let mut at_vertex = vec![None; graph.vertex_count()];
        let mut pending = vec![vec![BTreeSet::new(); graph.rows()]; classes.len()];
        let mut pending_per_class = vec![0; classes.len()];
        for (id, t) in tasks.iter().enumerate() {
            if !graph.contains(t.vertex) || !graph.is_interior(t.vertex) {
                return Err(MissionError::TaskOffInterior(t.vertex));
            }
            if !(t.actual_cost >= 0.0) || !t.actual_cost.is_finite() {
                return Err(MissionError::InvalidCost {
                    vertex: t.vertex,
                    cost: t.actual_cost,
                });
            }
            let slot = &mut at_vertex[graph.index(t.vertex)];
            if slot.is_some() {
                return Err(MissionError::DuplicateTask(t.vertex));
            }
            *slot = Some(id);
            if t.is_pending() {
                let c = classes
                    .index_of(t.level)
                    .ok_or(MissionError::UnknownLevel {
                        vertex: t.vertex,
                        level: t.level,
                    })?;
                pending[c][t.vertex.row - 1].insert(t.vertex.col);
                pending_per_class[c] += 1;
            }
        }
        Ok(Self {
            tasks,
            at_vertex,
            cols,
            pending,
            pending_per_class,
            classes: classes.clone(),
        })
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn classes(&self) -> &ClassSet {
        &self.classes
    }

    pub fn task_at(&self, v: VertexId) -> Option<&Task> {
        let idx = (v.row.checked_sub(1)?) * self.cols + v.col;
        self.at_vertex
            .get(idx)
            .copied()
            .flatten()
            .map(|i| &self.tasks[i])
    }

    pub fn pending_count(&self) -> usize {
        self.pending_per_class.iter().sum()
    }

    pub fn is_done(&self) -> bool {
        self.pending_count() == 0
    }

    pub fn pending_at_class(&self, class_index: usize) -> usize {
        self.pending_per_class[class_index]
    }

    pub fn pending_at_level(&self, level: u32) -> usize {
        self.classes
            .index_of(level)
            .map_or(0, |c| self.pending_per_class[c])
    }

    /// Interior columns of `row` holding a pending task of class `class_index`.
    pub fn pending_cols(&self, class_index: usize, row: usize) -> &BTreeSet<usize> {
        &self.pending[class_index][row - 1]
    }

    /// `(row, count)` for every row holding pending tasks of the class.
    pub fn rows_with_pending(&self, class_index: usize) -> Vec<(usize, usize)> {
        self.pending[class_index]
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_empty())
            .map(|(i, s)| (i + 1, s.len()))
            .collect()
    }

    pub fn row_has_pending(&self, row: usize) -> bool {
        self.pending.iter().any(|c| !c[row - 1].is_empty())
    }

    /// Pending columns of a class strictly ahead of `from_col` in `row`.
    pub fn ahead_of(
        &self,
        class_index: usize,
        row: usize,
        from_col: usize,
        heading: Heading,
    ) -> Box<dyn Iterator<Item = usize> + '_> {
        let set = &self.pending[class_index][row - 1];
        match heading {
            Heading::Right => Box::new(set.range(from_col + 1..).copied()),
            Heading::Left => Box::new(set.range(..from_col).rev().copied()),
        }
    }

    /// Nearest pending column of any class strictly ahead of `from_col`.
    pub fn next_pending_any(&self, row: usize, from_col: usize, heading: Heading) -> Option<usize> {
        let candidates =
            (0..self.pending.len()).filter_map(|c| self.ahead_of(c, row, from_col, heading).next());
        match heading {
            Heading::Right => candidates.min(),
            Heading::Left => candidates.max(),
        }
    }

    /// Mark the task at `v` completed. Returns the gain earned.
    pub fn complete(&mut self, v: VertexId) -> Option<f64> {
        let idx = (v.row - 1) * self.cols + v.col;
        let id = self.at_vertex.get(idx).copied().flatten()?;
        let task = &mut self.tasks[id];
        if !task.is_pending() {
            return None;
        }
        let c = self.classes.index_of(task.level)?;
        self.pending[c][v.row - 1].remove(&v.col);
        self.pending_per_class[c] -= 1;
        task.status = TaskStatus::Completed;
        task.level = 0;
        let mu = self
            .classes
            .get(task.initial_level)
            .map_or(0.0, |k| k.gain_ratio);
        Some(mu * task.actual_cost)
    }
}
