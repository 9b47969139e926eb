//! Lockstep execution of a mission under one planner.
//!
//! Each round every robot decides in id order (seeing the rows claimed by the
//! others), then every robot carries out its action: walk the planned path,
//! attempt the target task, or arrive at a base and refill.

use thiserror::Error;

use super::trace::{Event, MissionTrace, TraceHeader};
use super::{Mission, PlannerKind};
use crate::baselines::{ilm_next, nlm_next, sgpr_next, LawnmowerCursor, SgprRoute};
use crate::graph::VertexId;
use crate::planner::{next_action, Action, RobotState};
use crate::stopping::TripState;
use crate::task::TaskBoard;

/// Slack allowed on energy before a robot counts as stranded.
pub const ENERGY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("robot {robot} ran out of energy ({energy}) at {at}")]
    NegativeEnergy {
        robot: usize,
        energy: f64,
        at: VertexId,
    },
    #[error("robot {robot} tried an illegal move {from} -> {to}")]
    IllegalMove {
        robot: usize,
        from: VertexId,
        to: VertexId,
    },
    #[error("robot {robot} planned to work at {target} with no pending task")]
    NoTask { robot: usize, target: VertexId },
    #[error("robot {robot} ended its path at {at} instead of {expected}")]
    MissedTarget {
        robot: usize,
        at: VertexId,
        expected: VertexId,
    },
    #[error("robot {robot} ended a return at {at}, which is not a base station")]
    Stranded { robot: usize, at: VertexId },
    #[error("no robot can make progress with {pending} tasks pending")]
    Stalled { pending: usize },
    #[error("mission exceeded {rounds} rounds")]
    RoundLimit { rounds: usize },
    #[error("two robots work in row {row}")]
    SharedRow { row: usize },
    #[error("resource accounting broken for robot {robot}: {detail}")]
    Conservation { robot: usize, detail: String },
    #[error("attempt at {at} by robot {robot} has no outcome")]
    DanglingAttempt { robot: usize, at: VertexId },
    #[error("{pending} tasks left pending at the end of the mission")]
    Incomplete { pending: usize },
}

/// A violated execution invariant together with the trace up to that point.
#[derive(Debug, Clone, Error)]
#[error("{violation}")]
pub struct ExecutionError {
    pub violation: Violation,
    pub trace: Box<MissionTrace>,
}

enum PlannerState {
    Nbap,
    Lawnmower(LawnmowerCursor),
    Sgpr(SgprRoute),
}

struct Engine<'a> {
    mission: &'a Mission,
    planner: PlannerKind,
    board: TaskBoard,
    robots: Vec<RobotState>,
    states: Vec<PlannerState>,
    trace: MissionTrace,
}

impl Engine<'_> {
    fn claimed_rows(&self, except: usize) -> Vec<usize> {
        let mut rows = Vec::new();
        for (j, r) in self.robots.iter().enumerate() {
            if j == except {
                continue;
            }
            rows.extend(r.occupied_row);
            if let PlannerState::Sgpr(route) = &self.states[j] {
                rows.extend(route.rows());
            }
        }
        rows
    }

    fn is_fresh(&self, i: usize) -> bool {
        let r = &self.robots[i];
        let b = self.mission.budgets;
        r.trip.p == b.resource && r.trip.q == 0.0 && r.energy == b.energy
    }

    fn decide(&mut self, i: usize) -> Action {
        let g = &self.mission.graph;
        let claimed = self.claimed_rows(i);
        let robot = &self.robots[i];
        let action = match &mut self.states[i] {
            PlannerState::Nbap => next_action(g, &self.board, robot, &claimed),
            PlannerState::Lawnmower(cursor) => match self.planner {
                PlannerKind::InformedLawnmower => ilm_next(g, &self.board, robot, cursor),
                _ => nlm_next(g, &self.board, robot, cursor),
            },
            PlannerState::Sgpr(route) => sgpr_next(g, &self.board, robot, route, &claimed),
        };
        self.robots[i].occupied_row = action.row();
        action
    }

    fn run(&mut self, max_rounds: usize) -> Result<(), Violation> {
        let n = self.robots.len();
        for _ in 0..max_rounds {
            let at_base = self
                .robots
                .iter()
                .all(|r| self.mission.graph.is_base(r.pose));
            if self.board.is_done() && at_base {
                return Ok(());
            }
            let mut actions = Vec::with_capacity(n);
            let mut idle = 0;
            for i in 0..n {
                let action = self.decide(i);
                if action.is_idle() && self.is_fresh(i) {
                    idle += 1;
                } else {
                    let (level, row) = match &action {
                        Action::PerformInRow { level, row, .. } => (*level, Some(*row)),
                        Action::ReturnToBase { .. } => (0, None),
                    };
                    self.trace.events.push(Event::Decide {
                        robot: i,
                        level,
                        row,
                    });
                }
                actions.push(action);
            }
            if idle == n {
                return Err(Violation::Stalled {
                    pending: self.board.pending_count(),
                });
            }
            let mut worked: Vec<usize> = Vec::new();
            for (i, action) in actions.iter().enumerate() {
                if let Action::PerformInRow { row, .. } = action {
                    if worked.contains(row) {
                        return Err(Violation::SharedRow { row: *row });
                    }
                    worked.push(*row);
                }
                self.apply(i, action)?;
            }
        }
        Err(Violation::RoundLimit { rounds: max_rounds })
    }

    fn apply(&mut self, i: usize, action: &Action) -> Result<(), Violation> {
        let g = &self.mission.graph;
        for &to in action.path() {
            let r = &mut self.robots[i];
            let from = r.pose;
            if !g.is_legal_step(from, r.heading, to) {
                return Err(Violation::IllegalMove { robot: i, from, to });
            }
            let cost = g.edge_cost(from, to).expect("legal steps follow edges");
            r.energy -= cost;
            r.heading = g.heading_after(from, to, r.heading);
            r.pose = to;
            self.trace.events.push(Event::Move {
                robot: i,
                from,
                to,
                cost,
            });
            if r.energy < -ENERGY_TOLERANCE {
                return Err(Violation::NegativeEnergy {
                    robot: i,
                    energy: r.energy,
                    at: to,
                });
            }
        }
        let r = &mut self.robots[i];
        match action {
            Action::PerformInRow { target, .. } => {
                if r.pose != *target {
                    return Err(Violation::MissedTarget {
                        robot: i,
                        at: r.pose,
                        expected: *target,
                    });
                }
                let Some(task) = self.board.task_at(*target).filter(|t| t.is_pending()) else {
                    return Err(Violation::NoTask {
                        robot: i,
                        target: *target,
                    });
                };
                let cost = task.actual_cost;
                self.trace.events.push(Event::Attempt {
                    robot: i,
                    at: *target,
                });
                if cost <= r.trip.p {
                    let gain = self.board.complete(*target).expect("task is pending");
                    r.trip.p -= cost;
                    r.trip.q += gain;
                    self.trace.events.push(Event::Complete {
                        robot: i,
                        at: *target,
                        cost,
                        gain,
                    });
                } else {
                    let wasted = r.trip.p;
                    r.trip.p = 0.0;
                    self.trace.events.push(Event::Abort {
                        robot: i,
                        at: *target,
                        wasted,
                    });
                }
            }
            Action::ReturnToBase { path } => {
                if !g.is_base(r.pose) {
                    return Err(Violation::Stranded {
                        robot: i,
                        at: r.pose,
                    });
                }
                let b = self.mission.budgets;
                if !path.is_empty()
                    || r.trip.p != b.resource
                    || r.trip.q != 0.0
                    || r.energy != b.energy
                {
                    self.trace.events.push(Event::Reset {
                        robot: i,
                        at: r.pose,
                        unspent: r.trip.p,
                    });
                    r.trip = TripState::new(b.resource, 0.0);
                    r.energy = b.energy;
                    if let Some(side) = g.side_of(r.pose) {
                        r.heading = side.inward();
                    }
                }
                r.occupied_row = None;
            }
        }
        Ok(())
    }
}

/// Round budget generous enough for any terminating planner.
pub fn round_limit(mission: &Mission, team_size: usize) -> usize {
    let tasks = mission.tasks.len();
    10_000 + 200 * (tasks + 1) * team_size.max(1)
}

/// Run `mission` to completion with `team_size` robots under `planner`.
///
/// Robots start at the deployment base with full budgets. The run ends once
/// every task is complete and every robot is back at a base station.
pub fn execute(
    mission: &Mission,
    planner: PlannerKind,
    team_size: usize,
) -> Result<MissionTrace, ExecutionError> {
    let g = &mission.graph;
    let team = team_size.max(1);
    let b = mission.budgets;
    let robots: Vec<RobotState> = (0..team)
        .map(|i| RobotState::at_base(i, g, mission.deploy, b.resource, b.energy))
        .collect();
    let states = (0..team)
        .map(|i| match planner {
            PlannerKind::Nbap => PlannerState::Nbap,
            PlannerKind::NaiveLawnmower | PlannerKind::InformedLawnmower => {
                PlannerState::Lawnmower(LawnmowerCursor::new(g, mission.deploy.row, i, team))
            }
            PlannerKind::Sgpr => PlannerState::Sgpr(SgprRoute::default()),
        })
        .collect();
    let mut trace = MissionTrace::new(TraceHeader {
        planner: planner.name().to_string(),
        robots: team,
        tasks: mission.tasks.len(),
        ground_truth_gain: mission.ground_truth_gain(),
        resource: b.resource,
        energy: b.energy,
    });
    for r in &robots {
        trace.events.push(Event::Start {
            robot: r.id,
            at: r.pose,
        });
    }
    let mut engine = Engine {
        mission,
        planner,
        board: mission.board(),
        robots,
        states,
        trace,
    };
    match engine.run(round_limit(mission, team)) {
        Ok(()) => Ok(engine.trace),
        Err(violation) => Err(ExecutionError {
            violation,
            trace: Box::new(engine.trace),
        }),
    }
}
