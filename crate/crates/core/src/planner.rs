//! NBA-P: next-best-action planning with energy gating and row selection.

use crate::graph::{AisleGraph, Heading, VertexId};
use crate::stopping::{sample_q1, CandidateSet, TripState};
use crate::task::{PriorityClass, TaskBoard};

#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    pub id: usize,
    pub pose: VertexId,
    pub heading: Heading,
    pub trip: TripState,
    /// Remaining energy `T`.
    pub energy: f64,
    /// Row the robot works in or has reserved.
    pub occupied_row: Option<usize>,
}

impl RobotState {
    /// A robot parked at a base station with fresh budgets, facing the field.
    pub fn at_base(
        id: usize,
        graph: &AisleGraph,
        base: VertexId,
        resource: f64,
        energy: f64,
    ) -> Self {
        let heading = graph.side_of(base).map_or(Heading::Right, |s| s.inward());
        Self {
            id,
            pose: base,
            heading,
            trip: TripState::new(resource, 0.0),
            energy,
            occupied_row: None,
        }
    }

    /// The row the robot is physically inside, if any.
    pub fn interior_row(&self, graph: &AisleGraph) -> Option<usize> {
        graph.is_interior(self.pose).then_some(self.pose.row)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    /// Walk `path` (excluding the current pose) and attempt the task at its
    /// end, `target`. `level` is the priority level the choice was made for.
    PerformInRow {
        row: usize,
        level: u32,
        target: VertexId,
        path: Vec<VertexId>,
    },
    /// Walk `path` to a base station. Empty when already there.
    ReturnToBase { path: Vec<VertexId> },
}

impl Action {
    pub fn path(&self) -> &[VertexId] {
        match self {
            Action::PerformInRow { path, .. } | Action::ReturnToBase { path } => path,
        }
    }

    pub fn row(&self) -> Option<usize> {
        match self {
            Action::PerformInRow { row, .. } => Some(*row),
            Action::ReturnToBase { .. } => None,
        }
    }

    pub fn is_idle(&self) -> bool {
        matches!(self, Action::ReturnToBase { path } if path.is_empty())
    }
}

/// Whether the robot can work in `row` and still reach a base station.
pub fn energy_feasible(graph: &AisleGraph, robot: &RobotState, row: usize) -> bool {
    robot.energy >= graph.through_row_cost(robot.pose, robot.heading, row)
}

/// Candidate rows that pass the energy check and are not taken by another
/// robot. In the robot's own row only tasks still ahead of it count.
pub fn filter_q2(
    graph: &AisleGraph,
    board: &TaskBoard,
    robot: &RobotState,
    q1: &CandidateSet,
    occupied_rows: &[usize],
) -> CandidateSet {
    if q1.is_empty() {
        return CandidateSet::empty();
    }
    let class = board.classes().index_of(q1.level);
    let own = robot.interior_row(graph);
    let rows = q1
        .rows
        .iter()
        .filter_map(|&(row, count)| {
            if Some(row) != own && occupied_rows.contains(&row) {
                return None;
            }
            let count = match (own, class) {
                (Some(r), Some(c)) if r == row => board
                    .ahead_of(c, row, robot.pose.col, robot.heading)
                    .count(),
                _ => count,
            };
            (count > 0 && energy_feasible(graph, robot, row)).then_some((row, count))
        })
        .collect();
    CandidateSet {
        level: q1.level,
        rows,
    }
}

/// Row with the most tasks the remaining resource is expected to cover,
/// breaking ties by approach cost and then by row index.
pub fn select_row(
    q2: &CandidateSet,
    robot: &RobotState,
    class: &PriorityClass,
    graph: &AisleGraph,
) -> usize {
    let cap = (robot.trip.p / class.mean_cost).floor().max(0.0);
    let mut best: Option<(f64, f64, usize)> = None;
    for &(row, count) in &q2.rows {
        let score = (count as f64).min(cap);
        let approach = graph.t_alpha(robot.pose, robot.heading, row);
        let better = match best {
            None => true,
            Some((s, a, r)) => {
                score > s || (score == s && (approach < a || (approach == a && row < r)))
            }
        };
        if better {
            best = Some((score, approach, row));
        }
    }
    best.map(|(_, _, r)| r)
        .expect("select_row needs a nonempty candidate set")
}

/// Cheapest legal walk from the robot to a base station.
pub fn plan_return(graph: &AisleGraph, robot: &RobotState) -> Option<Vec<VertexId>> {
    graph
        .route_to_base(robot.pose, robot.heading)
        .map(|(_, path)| path)
}

/// Walk to the first pending task of class `class_index` met when working
/// through `row` from the robot's current position.
pub fn path_to_first_task(
    graph: &AisleGraph,
    board: &TaskBoard,
    robot: &RobotState,
    row: usize,
    class_index: usize,
) -> Option<(VertexId, Vec<VertexId>)> {
    if robot.interior_row(graph) == Some(row) {
        let col = board
            .ahead_of(class_index, row, robot.pose.col, robot.heading)
            .next()?;
        let path = graph.in_row_path(row, robot.pose.col, robot.heading, col);
        return Some((VertexId::new(row, col), path));
    }
    let mut path = graph.approach_path(robot.pose, robot.heading, row);
    let side = graph.entry_side(robot.pose, robot.heading);
    let heading = side.inward();
    let entry_col = graph.side_col(side);
    let cols = board.pending_cols(class_index, row);
    let col = match heading {
        Heading::Right => cols.iter().next(),
        Heading::Left => cols.iter().next_back(),
    }
    .copied()?;
    path.extend(graph.in_row_path(row, entry_col, heading, col));
    Some((VertexId::new(row, col), path))
}

/// One pass of the NBA-P decision loop for a single robot.
///
/// Levels are tried from the top; a level whose candidates are all ruled
/// out by energy or occupancy drops to the next one. A robot already inside
/// a row with a candidate ahead keeps working that row, since it cannot turn
/// back and leaving means walking past the task anyway.
pub fn next_action(
    graph: &AisleGraph,
    board: &TaskBoard,
    robot: &RobotState,
    occupied_rows: &[usize],
) -> Action {
    let classes = board.classes();
    let mut level = classes.max_level();
    while level > 0 {
        let q1 = sample_q1(robot.trip, level, board);
        if q1.is_empty() {
            break;
        }
        let q2 = filter_q2(graph, board, robot, &q1, occupied_rows);
        if !q2.is_empty() {
            let class_index = classes
                .index_of(q1.level)
                .expect("level from the class set");
            let class = &classes.as_slice()[class_index];
            let row = match robot.interior_row(graph) {
                Some(r) if q2.count_in(r) > 0 => r,
                _ => select_row(&q2, robot, class, graph),
            };
            if let Some((target, path)) = path_to_first_task(graph, board, robot, row, class_index)
            {
                return Action::PerformInRow {
                    row,
                    level: q1.level,
                    target,
                    path,
                };
            }
        }
        level = q1.level - 1;
    }
    Action::ReturnToBase {
        path: plan_return(graph, robot).unwrap_or_default(),
    }
}

/// Decide for every robot in id order. Each decision sees the rows the
/// other robots occupy or have just reserved.
pub fn coordinate_step(
    graph: &AisleGraph,
    board: &TaskBoard,
    robots: &mut [RobotState],
) -> Vec<Action> {
    let mut actions = Vec::with_capacity(robots.len());
    for i in 0..robots.len() {
        let occupied: Vec<usize> = robots
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .filter_map(|(_, r)| r.occupied_row)
            .collect();
        let action = next_action(graph, board, &robots[i], &occupied);
        robots[i].occupied_row = action.row();
        actions.push(action);
    }
    actions
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task::{ClassSet, Task};

    fn small_graph() -> AisleGraph {
        AisleGraph::uniform(3, 3, 1.0, [VertexId::new(2, 0)]).unwrap()
    }

    fn robot(pose: VertexId, heading: Heading, p: f64, energy: f64) -> RobotState {
        RobotState {
            id: 0,
            pose,
            heading,
            trip: TripState::new(p, 0.0),
            energy,
            occupied_row: None,
        }
    }

    fn board(g: &AisleGraph, classes: &ClassSet, tasks: &[(usize, usize, u32)]) -> TaskBoard {
        let tasks = tasks
            .iter()
            .map(|&(r, c, l)| Task::new(VertexId::new(r, c), l, 1.0))
            .collect();
        TaskBoard::new(g, classes, tasks).unwrap()
    }

    #[test]
    fn energy_examples() {
        let g = small_graph();
        let at = VertexId::new(1, 1);
        assert!(energy_feasible(&g, &robot(at, Heading::Right, 1.0, 7.0), 3));
        assert!(!energy_feasible(
            &g,
            &robot(at, Heading::Right, 1.0, 6.0),
            3
        ));
        assert!(!energy_feasible(
            &g,
            &robot(VertexId::new(2, 0), Heading::Right, 1.0, 0.0),
            1
        ));
    }

    #[test]
    fn select_row_examples() {
        let g = small_graph();
        let class = PriorityClass::new(1, 1.0, 2.0);
        let q2 = CandidateSet {
            level: 1,
            rows: vec![(1, 3), (2, 5)],
        };
        let base = VertexId::new(2, 0);
        assert_eq!(
            select_row(&q2, &robot(base, Heading::Right, 20.0, 50.0), &class, &g),
            2
        );
        // both rows clamp to two tasks; row 1 is closer from v(1,0)
        let at = VertexId::new(1, 0);
        assert_eq!(
            select_row(&q2, &robot(at, Heading::Right, 4.0, 50.0), &class, &g),
            1
        );
        let single = CandidateSet {
            level: 1,
            rows: vec![(3, 1)],
        };
        assert_eq!(
            select_row(&single, &robot(base, Heading::Right, 4.0, 50.0), &class, &g),
            3
        );
    }

    #[test]
    fn occupied_rows_are_filtered() {
        let g = small_graph();
        let classes = ClassSet::single(1.0, 1.0).unwrap();
        let b = board(
            &g,
            &classes,
            &[(1, 1), (1, 3), (3, 2)].map(|(r, c)| (r, c, 1)),
        );
        let r = robot(VertexId::new(2, 0), Heading::Right, 10.0, 100.0);
        let q1 = sample_q1(r.trip, 1, &b);
        assert_eq!(filter_q2(&g, &b, &r, &q1, &[]).rows, vec![(1, 2), (3, 1)]);
        assert_eq!(filter_q2(&g, &b, &r, &q1, &[3]).rows, vec![(1, 2)]);
        let tired = robot(VertexId::new(2, 0), Heading::Right, 10.0, 0.5);
        assert!(filter_q2(&g, &b, &tired, &q1, &[]).is_empty());
    }

    #[test]
    fn lower_level_used_when_higher_rows_unreachable() {
        let g = AisleGraph::uniform(6, 3, 1.0, [VertexId::new(1, 0)]).unwrap();
        let classes = ClassSet::new([
            PriorityClass::new(1, 1.0, 1.0),
            PriorityClass::new(2, 2.0, 1.0),
        ])
        .unwrap();
        let b = board(&g, &classes, &[(6, 2, 2), (1, 2, 1)]);
        // row 6 needs 5 + 2 + return, row 1 needs 2 + return
        let r = robot(VertexId::new(1, 0), Heading::Right, 10.0, 6.0);
        match next_action(&g, &b, &r, &[]) {
            Action::PerformInRow {
                row,
                level,
                target,
                path,
            } => {
                assert_eq!((row, level, target), (1, 1, VertexId::new(1, 2)));
                assert_eq!(path, vec![VertexId::new(1, 1), VertexId::new(1, 2)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn returns_when_nothing_is_worth_doing() {
        let g = small_graph();
        let classes = ClassSet::single(1.0, 1.0).unwrap();
        let empty = board(&g, &classes, &[]);
        let at = VertexId::new(1, 4);
        let r = robot(at, Heading::Right, 10.0, 100.0);
        assert_eq!(
            next_action(&g, &empty, &r, &[]),
            Action::ReturnToBase {
                path: plan_return(&g, &r).unwrap()
            }
        );
        let b = board(&g, &classes, &[(1, 1, 1)]);
        let mut full = robot(VertexId::new(2, 0), Heading::Right, 1.0, 100.0);
        full.trip.q = 100.0;
        assert_eq!(
            next_action(&g, &b, &full, &[]),
            Action::ReturnToBase { path: vec![] }
        );
    }

    #[test]
    fn second_robot_takes_next_best_row() {
        let g = small_graph();
        let classes = ClassSet::single(1.0, 1.0).unwrap();
        let b = board(&g, &classes, &[(2, 1, 1), (2, 2, 1), (2, 3, 1), (1, 2, 1)]);
        let mut team = vec![
            robot(VertexId::new(2, 0), Heading::Right, 10.0, 100.0),
            robot(VertexId::new(2, 0), Heading::Right, 10.0, 100.0),
        ];
        team[1].id = 1;
        let actions = coordinate_step(&g, &b, &mut team);
        assert_eq!(actions[0].row(), Some(2));
        assert_eq!(actions[1].row(), Some(1));
    }

    #[test]
    fn mid_row_robot_keeps_its_row() {
        let g = small_graph();
        let classes = ClassSet::single(1.0, 1.0).unwrap();
        let b = board(&g, &classes, &[(1, 3, 1), (2, 1, 1), (2, 2, 1), (2, 3, 1)]);
        let r = robot(VertexId::new(1, 1), Heading::Right, 10.0, 100.0);
        match next_action(&g, &b, &r, &[]) {
            Action::PerformInRow {
                row, target, path, ..
            } => {
                assert_eq!((row, target), (1, VertexId::new(1, 3)));
                assert_eq!(path, vec![VertexId::new(1, 2), VertexId::new(1, 3)]);
            }
            other => panic!("unexpected {other:?}"),
        }
        // another robot mid-row 1 hides it from this one
        let other = robot(VertexId::new(2, 0), Heading::Right, 10.0, 100.0);
        let q1 = sample_q1(other.trip, 1, &b);
        assert_eq!(filter_q2(&g, &b, &other, &q1, &[1]).rows, vec![(2, 3)]);
    }
}
