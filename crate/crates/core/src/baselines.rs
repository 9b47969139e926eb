//! Reference planners: naive and informed lawnmower sweeps and a greedy
//! partial-row router.

use std::collections::VecDeque;

use crate::graph::{AisleGraph, Heading, VertexId};
use crate::planner::{energy_feasible, plan_return, Action, RobotState};
use crate::task::TaskBoard;

/// Sweep state of one lawnmower robot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawnmowerCursor {
    order: Vec<usize>,
    current: Option<usize>,
}

impl LawnmowerCursor {
    /// Rows are dealt to robots round-robin by id. Each robot sweeps its
    /// rows starting from the end of the field nearest the deployment row.
    pub fn new(graph: &AisleGraph, deploy_row: usize, robot: usize, team_size: usize) -> Self {
        let m = graph.rows();
        let mut order: Vec<usize> = (1..=m)
            .filter(|r| (r - 1) % team_size.max(1) == robot)
            .collect();
        if m - deploy_row < deploy_row - 1 {
            order.reverse();
        }
        Self {
            order,
            current: None,
        }
    }

    pub fn rows(&self) -> &[usize] {
        &self.order
    }

    /// Row currently being swept.
    pub fn current_row(&self) -> Option<usize> {
        self.current.map(|i| self.order[i])
    }

    // rows in sweep order after the current one, wrapping around
    fn upcoming(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let start = self.current.map_or(0, |i| i + 1);
        let len = self.order.len();
        (0..len).map(move |k| {
            let i = (start + k) % len;
            (i, self.order[i])
        })
    }
}

fn attemptable(board: &TaskBoard, v: VertexId, p: f64, informed: bool) -> Option<u32> {
    let task = board.task_at(v).filter(|t| t.is_pending())?;
    if informed {
        let w = board.classes().get(task.level)?.mean_cost;
        if p <= w {
            return None;
        }
    }
    Some(task.level)
}

fn first_in_row(
    board: &TaskBoard,
    row: usize,
    cols: impl Iterator<Item = usize>,
    p: f64,
    informed: bool,
) -> Option<(usize, u32)> {
    cols.filter_map(|c| attemptable(board, VertexId::new(row, c), p, informed).map(|l| (c, l)))
        .next()
}

fn cols_ahead(graph: &AisleGraph, col: usize, heading: Heading) -> Box<dyn Iterator<Item = usize>> {
    let n = graph.interior_cols();
    match heading {
        Heading::Right => Box::new((col + 1)..=n),
        Heading::Left => Box::new((1..col).rev()),
    }
}

fn entry_cols(graph: &AisleGraph, heading: Heading) -> Box<dyn Iterator<Item = usize>> {
    let n = graph.interior_cols();
    match heading {
        Heading::Right => Box::new(1..=n),
        Heading::Left => Box::new((1..=n).rev()),
    }
}

fn go_home(graph: &AisleGraph, robot: &RobotState) -> Action {
    Action::ReturnToBase {
        path: plan_return(graph, robot).unwrap_or_default(),
    }
}

fn lawnmower_next(
    graph: &AisleGraph,
    board: &TaskBoard,
    robot: &RobotState,
    cursor: &mut LawnmowerCursor,
    informed: bool,
) -> Action {
    let p = robot.trip.p;
    if let Some(row) = robot.interior_row(graph) {
        let ahead = cols_ahead(graph, robot.pose.col, robot.heading);
        if let Some((col, level)) = first_in_row(board, row, ahead, p, informed) {
            return Action::PerformInRow {
                row,
                level,
                target: VertexId::new(row, col),
                path: graph.in_row_path(row, robot.pose.col, robot.heading, col),
            };
        }
    }
    if p <= 0.0 {
        return go_home(graph, robot);
    }
    let own = robot.interior_row(graph);
    let mut chosen = None;
    for (i, row) in cursor.upcoming() {
        if Some(row) == own {
            continue;
        }
        let heading = graph.entry_side(robot.pose, robot.heading).inward();
        if let Some((col, level)) =
            first_in_row(board, row, entry_cols(graph, heading), p, informed)
        {
            chosen = Some((i, row, col, level, heading));
            break;
        }
    }
    let Some((i, row, col, level, heading)) = chosen else {
        return go_home(graph, robot);
    };
    if !energy_feasible(graph, robot, row) {
        return go_home(graph, robot);
    }
    cursor.current = Some(i);
    let mut path = graph.approach_path(robot.pose, robot.heading, row);
    let entry_col = graph.side_col(graph.entry_side(robot.pose, robot.heading));
    path.extend(graph.in_row_path(row, entry_col, heading, col));
    Action::PerformInRow {
        row,
        level,
        target: VertexId::new(row, col),
        path,
    }
}

/// Naive lawnmower: sweep rows in order and attempt every pending task met,
/// whatever resource is left. Heads home at a row end once the resource is
/// spent, or when energy would not cover the next row.
pub fn nlm_next(
    graph: &AisleGraph,
    board: &TaskBoard,
    robot: &RobotState,
    cursor: &mut LawnmowerCursor,
) -> Action {
    lawnmower_next(graph, board, robot, cursor, false)
}

/// Informed lawnmower: the same sweep, but a task is only attempted while the
/// remaining resource exceeds its level's mean cost.
pub fn ilm_next(
    graph: &AisleGraph,
    board: &TaskBoard,
    robot: &RobotState,
    cursor: &mut LawnmowerCursor,
) -> Action {
    lawnmower_next(graph, board, robot, cursor, true)
}

/// A contiguous run of tasks in one row, listed in the order they are met.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub row: usize,
    pub cols: Vec<usize>,
}

/// Planned trip of a greedy partial-row robot.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SgprRoute {
    pub segments: VecDeque<Segment>,
}

impl SgprRoute {
    pub fn rows(&self) -> impl Iterator<Item = usize> + '_ {
        self.segments.iter().map(|s| s.row)
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

/// Build one trip greedily from the robot's current state. Each step adds the
/// segment with the best ratio of expected gain to expected resource plus
/// travel cost, as long as the energy to get home is kept in reserve and the
/// remaining resource exceeds the segment's expected cost.
pub fn sgpr_plan(
    graph: &AisleGraph,
    board: &TaskBoard,
    robot: &RobotState,
    reserved_rows: &[usize],
) -> SgprRoute {
    let classes = board.classes();
    let mut pose = robot.pose;
    let mut heading = robot.heading;
    let mut energy = robot.energy;
    let mut resource = robot.trip.p;
    let mut used: Vec<usize> = reserved_rows.to_vec();
    let mut route = SgprRoute::default();
    loop {
        let mut best: Option<(f64, Segment, f64, f64, VertexId, Heading)> = None;
        for row in 1..=graph.rows() {
            if used.contains(&row) || !board.row_has_pending(row) {
                continue;
            }
            let side = graph.entry_side(pose, heading);
            let dir = side.inward();
            // a row cannot be left midway, so any prefix costs a full traversal
            let travel =
                graph.t_alpha(pose, heading, row) + graph.t_beta(row).expect("row in range");
            if travel + graph.exit_return_cost(row, dir) > energy {
                continue;
            }
            let exit = VertexId::new(row, graph.side_col(side.opposite()));
            let mut cols = Vec::new();
            let (mut gain, mut cost) = (0.0, 0.0);
            for c in entry_cols(graph, dir) {
                let v = VertexId::new(row, c);
                let Some(task) = board.task_at(v).filter(|t| t.is_pending()) else {
                    continue;
                };
                let class = classes
                    .get(task.level)
                    .expect("pending task level is defined");
                if cost + class.mean_cost >= resource {
                    break;
                }
                cols.push(c);
                gain += class.gain_ratio * class.mean_cost;
                cost += class.mean_cost;
                let ratio = gain / (travel + cost);
                if best.as_ref().is_none_or(|b| ratio > b.0) {
                    best = Some((
                        ratio,
                        Segment {
                            row,
                            cols: cols.clone(),
                        },
                        travel,
                        cost,
                        exit,
                        dir,
                    ));
                }
            }
        }
        let Some((_, segment, travel, cost, end, dir)) = best else {
            break;
        };
        energy -= travel;
        resource -= cost;
        pose = end;
        heading = dir;
        used.push(segment.row);
        route.segments.push_back(segment);
    }
    route
}

/// Next step along a greedy partial-row route, planning a fresh trip when
/// the robot is at a base station with nothing left to follow.
pub fn sgpr_next(
    graph: &AisleGraph,
    board: &TaskBoard,
    robot: &RobotState,
    route: &mut SgprRoute,
    reserved_rows: &[usize],
) -> Action {
    if robot.trip.p <= 0.0 {
        route.segments.clear();
        return go_home(graph, robot);
    }
    while let Some(seg) = route.segments.front_mut() {
        seg.cols.retain(|&c| {
            board
                .task_at(VertexId::new(seg.row, c))
                .is_some_and(|t| t.is_pending())
        });
        if seg.cols.is_empty() {
            route.segments.pop_front();
        } else {
            break;
        }
    }
    if route.is_empty() {
        if graph.is_base(robot.pose) {
            *route = sgpr_plan(graph, board, robot, reserved_rows);
        }
        if route.is_empty() {
            return go_home(graph, robot);
        }
    }
    let seg = route.segments.front().expect("route is not empty");
    let (row, col) = (seg.row, seg.cols[0]);
    let level = board
        .task_at(VertexId::new(row, col))
        .map_or(0, |t| t.level);
    let path = if robot.interior_row(graph) == Some(row) {
        graph.in_row_path(row, robot.pose.col, robot.heading, col)
    } else {
        let side = graph.entry_side(robot.pose, robot.heading);
        let mut path = graph.approach_path(robot.pose, robot.heading, row);
        path.extend(graph.in_row_path(row, graph.side_col(side), side.inward(), col));
        path
    };
    Action::PerformInRow {
        row,
        level,
        target: VertexId::new(row, col),
        path,
    }
}
