#![allow(dead_code)]

use std::sync::Arc;

use nbap::graph::{AisleGraph, EdgeCosts, Heading, VertexId};
use nbap::planner::{energy_feasible, RobotState};
use nbap::sim::{
    generate_mission, Budgets, Event, Mission, MissionSpec, MissionTrace, Purpose, RandomSource,
};
use nbap::stopping::{is_level_feasible, TripState};
use nbap::task::{ClassSet, PriorityClass, TaskBoard};
use rand::Rng;

/// Random graph with integer edge costs in `1..=4`, bases on random
/// boundary vertices.
pub fn random_graph<R: Rng>(rng: &mut R, max_rows: usize, max_cols: usize) -> AisleGraph {
    let m = rng.random_range(1..=max_rows);
    let n = rng.random_range(1..=max_cols);
    let mut horizontal = vec![vec![0.0; n + 1]; m];
    for row in &mut horizontal {
        for c in row.iter_mut().take(n).skip(1) {
            *c = f64::from(rng.random_range(1..=4));
        }
    }
    let vert = |rng: &mut R| {
        (0..m - 1)
            .map(|_| f64::from(rng.random_range(1..=4)))
            .collect::<Vec<_>>()
    };
    let left = vert(rng);
    let right = vert(rng);
    let mut bases = Vec::new();
    while bases.is_empty() {
        for r in 1..=m {
            for c in [0, n + 1] {
                if rng.random_bool(0.15) {
                    bases.push(VertexId::new(r, c));
                }
            }
        }
    }
    AisleGraph::new(
        m,
        n,
        EdgeCosts {
            horizontal,
            left,
            right,
        },
        bases,
    )
    .unwrap()
}

pub fn random_pose<R: Rng>(rng: &mut R, g: &AisleGraph) -> (VertexId, Heading) {
    let r = rng.random_range(1..=g.rows());
    let c = rng.random_range(0..=g.interior_cols() + 1);
    let h = if rng.random_bool(0.5) {
        Heading::Left
    } else {
        Heading::Right
    };
    (VertexId::new(r, c), h)
}

// Motion rules written out directly from the raw cost table: forward only
// inside a row, vertical moves on the connector columns turn the robot
// inward, and a row may be entered from a connector when facing inward,
// from a base station, or when there is only one row.
fn moves(g: &AisleGraph, r: usize, c: usize, h: Heading) -> Vec<(usize, usize, Heading, f64)> {
    let n = g.interior_cols();
    let m = g.rows();
    let k = g.costs();
    let mut out = Vec::new();
    if (1..=n).contains(&c) {
        match h {
            Heading::Right => out.push((r, c + 1, h, k.horizontal[r - 1][c])),
            Heading::Left => out.push((r, c - 1, h, k.horizontal[r - 1][c - 1])),
        }
        return out;
    }
    let (vert, inward, entry, entry_cost) = if c == 0 {
        (&k.left, Heading::Right, 1, k.horizontal[r - 1][0])
    } else {
        (&k.right, Heading::Left, n, k.horizontal[r - 1][n])
    };
    if r > 1 {
        out.push((r - 1, c, inward, vert[r - 2]));
    }
    if r < m {
        out.push((r + 1, c, inward, vert[r - 1]));
    }
    if h == inward || m == 1 || g.bases().contains(&VertexId::new(r, c)) {
        out.push((r, entry, inward, entry_cost));
    }
    out
}

/// Cheapest legal walk from `(pose, heading)` that works through every
/// interior vertex of `row` and then stops at a base station. A pose already
/// inside `row` only has to finish it.
pub fn through_row_oracle(g: &AisleGraph, pose: VertexId, heading: Heading, row: usize) -> f64 {
    through_row_walk(g, pose, heading, row, false)
}

/// Same walk restricted to the connector columns and a single pass through
/// the target row (plus finishing the row the robot already stands in).
/// Infinite when no such walk exists.
pub fn full_traversal_oracle(g: &AisleGraph, pose: VertexId, heading: Heading, row: usize) -> f64 {
    through_row_walk(g, pose, heading, row, true)
}

fn through_row_walk(
    g: &AisleGraph,
    pose: VertexId,
    heading: Heading,
    row: usize,
    restricted: bool,
) -> f64 {
    let m = g.rows();
    let w = g.interior_cols() + 2;
    let idx = |r: usize, c: usize, h: Heading, phase: usize| {
        (((r - 1) * w + c) * 2 + (h == Heading::Right) as usize) * 2 + phase
    };
    let total = m * w * 4;
    let mut dist = vec![f64::INFINITY; total];
    let mut done = vec![false; total];
    let mut state = vec![(0, 0, Heading::Left, 0); total];
    let inside = (1..w - 1).contains(&pose.col);
    let start_phase = usize::from(inside && pose.row == row);
    let s = idx(pose.row, pose.col, heading, start_phase);
    dist[s] = 0.0;
    state[s] = (pose.row, pose.col, heading, start_phase);
    loop {
        let mut best = None;
        for i in 0..total {
            if !done[i] && dist[i].is_finite() && best.is_none_or(|b: usize| dist[i] < dist[b]) {
                best = Some(i);
            }
        }
        let Some(u) = best else { return f64::INFINITY };
        done[u] = true;
        let (r, c, h, phase) = state[u];
        if phase == 1 && g.bases().contains(&VertexId::new(r, c)) {
            return dist[u];
        }
        for (r2, c2, h2, cost) in moves(g, r, c, h) {
            let enters_row = !(1..w - 1).contains(&c) && (1..w - 1).contains(&c2);
            if restricted && enters_row && (r2 != row || phase == 1) {
                continue;
            }
            let entering = phase == 0 && r2 == row && enters_row;
            let p2 = if entering { 1 } else { phase };
            let v = idx(r2, c2, h2, p2);
            if dist[u] + cost < dist[v] {
                dist[v] = dist[u] + cost;
                state[v] = (r2, c2, h2, p2);
            }
        }
    }
}

/// Cheapest legal walk to any base station.
pub fn return_oracle(g: &AisleGraph, pose: VertexId, heading: Heading) -> f64 {
    let m = g.rows();
    let w = g.interior_cols() + 2;
    let total = m * w * 2;
    let idx =
        |r: usize, c: usize, h: Heading| ((r - 1) * w + c) * 2 + (h == Heading::Right) as usize;
    let mut dist = vec![f64::INFINITY; total];
    let mut done = vec![false; total];
    let mut state = vec![(0, 0, Heading::Left); total];
    let s = idx(pose.row, pose.col, heading);
    dist[s] = 0.0;
    state[s] = (pose.row, pose.col, heading);
    loop {
        let mut best = None;
        for i in 0..total {
            if !done[i] && dist[i].is_finite() && best.is_none_or(|b: usize| dist[i] < dist[b]) {
                best = Some(i);
            }
        }
        let Some(u) = best else { return f64::INFINITY };
        done[u] = true;
        let (r, c, h) = state[u];
        if g.bases().contains(&VertexId::new(r, c)) {
            return dist[u];
        }
        for (r2, c2, h2, cost) in moves(g, r, c, h) {
            let v = idx(r2, c2, h2);
            if dist[u] + cost < dist[v] {
                dist[v] = dist[u] + cost;
                state[v] = (r2, c2, h2);
            }
        }
    }
}

/// Composite 5-point Gauss-Legendre rule on `[a, b]` with `panels` panels.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    const X: [f64; 5] = [
        0.0,
        0.538_469_310_105_683,
        -0.538_469_310_105_683,
        0.906_179_845_938_664,
        -0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        for i in 0..5 {
            sum += W[i] * f(mid + 0.5 * h * X[i]);
        }
    }
    sum * 0.5 * h
}

/// Uniform-cost 20x15 field with bases mid-way on both connector columns.
pub fn aisle_20x15() -> Arc<AisleGraph> {
    Arc::new(
        AisleGraph::uniform(20, 15, 1.0, [VertexId::new(10, 0), VertexId::new(10, 16)]).unwrap(),
    )
}

pub fn mission_with(
    graph: Arc<AisleGraph>,
    classes: ClassSet,
    tasks: Vec<nbap::Task>,
    budgets: Budgets,
) -> Mission {
    Mission::new(graph, classes, tasks, budgets, None).unwrap()
}

/// Replay a trace and check that every level-`s` work decision was made
/// while each higher level with pending work was either resource-infeasible
/// or had all of its candidate rows ruled out by energy or by another
/// robot's row. Returns a description of the first breach.
pub fn check_priority_compliance(trace: &MissionTrace, mission: &Mission) -> Result<usize, String> {
    let g = &mission.graph;
    let b = mission.budgets;
    let mut board = mission.board();
    let classes = mission.classes.clone();
    let mut robots: Vec<RobotState> = (0..trace.header.robots)
        .map(|i| RobotState::at_base(i, g, mission.deploy, b.resource, b.energy))
        .collect();
    let mut claimed: Vec<Option<usize>> = vec![None; robots.len()];
    let mut checked = 0;
    for e in &trace.events {
        match *e {
            Event::Start { robot, at } => {
                robots[robot] = RobotState::at_base(robot, g, at, b.resource, b.energy)
            }
            Event::Decide { robot, level, row } => {
                claimed[robot] = row;
                if level == 0 {
                    continue;
                }
                checked += 1;
                let r = &robots[robot];
                let others: Vec<usize> = claimed
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != robot)
                    .filter_map(|(_, c)| *c)
                    .collect();
                for (ci, class) in classes.iter().enumerate() {
                    if class.level <= level || board.pending_at_class(ci) == 0 {
                        continue;
                    }
                    if !is_level_feasible(r.trip, class) {
                        continue;
                    }
                    let own = g.is_interior(r.pose).then_some(r.pose.row);
                    for (row, _) in board.rows_with_pending(ci) {
                        let usable = if own == Some(row) {
                            board
                                .ahead_of(ci, row, r.pose.col, r.heading)
                                .next()
                                .is_some()
                        } else {
                            !others.contains(&row)
                        };
                        if usable && energy_feasible(g, r, row) {
                            return Err(format!(
                                "robot {robot} chose level {level} while level {} row {row} was open at {:?}",
                                class.level, r
                            ));
                        }
                    }
                }
            }
            Event::Move {
                robot,
                from,
                to,
                cost,
            } => {
                let r = &mut robots[robot];
                r.heading = g.heading_after(from, to, r.heading);
                r.pose = to;
                r.energy -= cost;
            }
            Event::Attempt { .. } => {}
            Event::Complete {
                robot,
                at,
                cost,
                gain,
            } => {
                board.complete(at);
                let r = &mut robots[robot];
                r.trip = TripState::new(r.trip.p - cost, r.trip.q + gain);
            }
            Event::Abort { robot, .. } => robots[robot].trip.p = 0.0,
            Event::Reset { robot, at, .. } => {
                robots[robot] = RobotState::at_base(robot, g, at, b.resource, b.energy);
                claimed[robot] = None;
            }
        }
    }
    Ok(checked)
}

/// Replay a trace and fail if two robots ever sit inside the same row.
pub fn check_row_exclusivity(trace: &MissionTrace, mission: &Mission) -> Result<(), String> {
    let g = &mission.graph;
    let mut pose: Vec<Option<VertexId>> = vec![None; trace.header.robots];
    for e in &trace.events {
        match *e {
            Event::Start { robot, at } | Event::Reset { robot, at, .. } => pose[robot] = Some(at),
            Event::Move { robot, to, .. } => pose[robot] = Some(to),
            Event::Attempt { robot, at } => {
                for (j, p) in pose.iter().enumerate() {
                    if j != robot && p.is_some_and(|v| g.is_interior(v) && v.row == at.row) {
                        return Err(format!(
                            "robot {robot} worked in row {} while robot {j} was in it",
                            at.row
                        ));
                    }
                }
            }
            _ => {}
        }
    }
    Ok(())
}

pub fn level_of(board: &TaskBoard, v: VertexId) -> Option<u32> {
    board.task_at(v).map(|t| t.initial_level)
}

/// Small random mission: uniform graph up to 12x12 with mirrored bases,
/// one or two levels, random task count, energy just above what the far
/// rows need.
pub fn random_mission(seed: u64) -> Mission {
    let mut rng = RandomSource::new(seed).stream(Purpose::Mission, 0, 0);
    let m: usize = rng.random_range(3..=12);
    let n = rng.random_range(3..=12);
    let mid = m.div_ceil(2);
    let graph = AisleGraph::uniform(
        m,
        n,
        1.0,
        [VertexId::new(mid, 0), VertexId::new(mid, n + 1)],
    )
    .unwrap();
    let classes = if rng.random_bool(0.5) {
        ClassSet::single(1.0, rng.random_range(0.5..3.0)).unwrap()
    } else {
        ClassSet::new([
            PriorityClass::new(1, 1.0, rng.random_range(0.5..3.0)),
            PriorityClass::new(2, 2.0, rng.random_range(0.5..3.0)),
        ])
        .unwrap()
    };
    let proportions = if classes.len() == 2 {
        vec![0.5, 0.5]
    } else {
        vec![]
    };
    let spec = MissionSpec {
        graph: Arc::new(graph),
        classes,
        budgets: Budgets::new(40.0, (2 * (m + n)) as f64 + rng.random_range(0.0..20.0)).unwrap(),
        task_count: rng.random_range(1..=m * n),
        proportions,
        deploy: None,
    };
    generate_mission(&spec, &mut rng).unwrap()
}
