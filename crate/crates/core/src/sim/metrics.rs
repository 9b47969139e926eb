use serde::Serialize;

use super::engine::Violation;
use super::trace::{Event, MissionTrace};
use super::Mission;
use crate::graph::VertexId;

/// Mission-level efficiency figures, summed over the team.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Metrics {
    /// Fraction of the ground-truth gain obtained, per visited vertex.
    pub rv_ratio: f64,
    /// Wasted resource per visited vertex.
    pub wv_ratio: f64,
    /// Number of task attempts.
    pub visited: usize,
    pub total_waste: f64,
    /// Total movement cost.
    pub path_length: f64,
    pub gain: f64,
    pub completed: usize,
    pub aborts: usize,
}

pub fn compute_metrics(trace: &MissionTrace) -> Metrics {
    let mut m = Metrics::default();
    for e in &trace.events {
        match *e {
            Event::Move { cost, .. } => m.path_length += cost,
            Event::Attempt { .. } => m.visited += 1,
            Event::Complete { gain, .. } => {
                m.gain += gain;
                m.completed += 1;
            }
            Event::Abort { wasted, .. } => {
                m.total_waste += wasted;
                m.aborts += 1;
            }
            _ => {}
        }
    }
    if m.visited > 0 {
        let truth = trace.header.ground_truth_gain;
        let fraction = if truth > 0.0 { m.gain / truth } else { 0.0 };
        m.rv_ratio = fraction / m.visited as f64;
        m.wv_ratio = m.total_waste / m.visited as f64;
    }
    m
}

/// Cumulative gain fraction and waste after each attempt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub visited: usize,
    pub gain_fraction: f64,
    pub waste: f64,
}

pub fn curve(trace: &MissionTrace) -> Vec<CurvePoint> {
    let truth = trace.header.ground_truth_gain;
    let mut out = Vec::new();
    let (mut gain, mut waste) = (0.0, 0.0);
    for e in &trace.events {
        match *e {
            Event::Complete { gain: g, .. } => gain += g,
            Event::Abort { wasted, .. } => waste += wasted,
            _ => continue,
        }
        out.push(CurvePoint {
            visited: out.len() + 1,
            gain_fraction: if truth > 0.0 { gain / truth } else { 0.0 },
            waste,
        });
    }
    out
}

#[derive(Debug, Clone, Default)]
struct RobotLedger {
    pose: Option<VertexId>,
    p: f64,
    energy: f64,
    pending_attempt: Option<VertexId>,
    spent: f64,
    wasted: f64,
}

/// Replay a finished trace and check the execution invariants: energy never
/// negative, each attempt resolved, every trip ends at a base station with
/// `P0 = completed costs + waste + unspent` (exactly under sequential
/// replay, and to rounding as a sum), all tasks complete, all robots home.
pub fn check_invariants(trace: &MissionTrace, mission: &Mission) -> Result<(), Violation> {
    let g = &mission.graph;
    let p0 = trace.header.resource;
    let t0 = trace.header.energy;
    let mut robots = vec![RobotLedger::default(); trace.header.robots];
    let mut completed = 0;
    let broken = |robot: usize, detail: String| Violation::Conservation { robot, detail };
    for e in &trace.events {
        let i = e.robot();
        let r = &mut robots[i];
        if let Some(at) = r.pending_attempt {
            if !matches!(e, Event::Complete { .. } | Event::Abort { .. }) {
                return Err(Violation::DanglingAttempt { robot: i, at });
            }
        }
        match *e {
            Event::Start { at, .. } => {
                *r = RobotLedger {
                    pose: Some(at),
                    p: p0,
                    energy: t0,
                    ..RobotLedger::default()
                };
            }
            Event::Decide { .. } => {}
            Event::Move { to, cost, .. } => {
                r.energy -= cost;
                r.pose = Some(to);
                if r.energy < -super::engine::ENERGY_TOLERANCE {
                    return Err(Violation::NegativeEnergy {
                        robot: i,
                        energy: r.energy,
                        at: to,
                    });
                }
            }
            Event::Attempt { at, .. } => r.pending_attempt = Some(at),
            Event::Complete { cost, .. } => {
                r.pending_attempt = None;
                if cost > r.p {
                    return Err(broken(
                        i,
                        format!("completed a task of cost {cost} with {} left", r.p),
                    ));
                }
                r.p -= cost;
                r.spent += cost;
                completed += 1;
            }
            Event::Abort { wasted, .. } => {
                r.pending_attempt = None;
                if wasted != r.p {
                    return Err(broken(
                        i,
                        format!("abort wasted {wasted} but {} was left", r.p),
                    ));
                }
                r.p = 0.0;
                r.wasted += wasted;
            }
            Event::Reset { at, unspent, .. } => {
                if !g.is_base(at) {
                    return Err(Violation::Stranded { robot: i, at });
                }
                if unspent != r.p {
                    return Err(broken(
                        i,
                        format!("trip ended with {unspent} recorded but {} replayed", r.p),
                    ));
                }
                let total = r.spent + r.wasted + unspent;
                if (total - p0).abs() > 1e-9 * p0.max(1.0) {
                    return Err(broken(i, format!("trip used {total} of {p0}")));
                }
                *r = RobotLedger {
                    pose: Some(at),
                    p: p0,
                    energy: t0,
                    ..RobotLedger::default()
                };
            }
        }
    }
    for (i, r) in robots.iter().enumerate() {
        if let Some(at) = r.pending_attempt {
            return Err(Violation::DanglingAttempt { robot: i, at });
        }
        if let Some(at) = r.pose {
            if !g.is_base(at) {
                return Err(Violation::Stranded { robot: i, at });
            }
        }
    }
    if completed != mission.tasks.len() {
        return Err(Violation::Incomplete {
            pending: mission.tasks.len() - completed,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::trace::TraceHeader;

    fn trace(events: Vec<Event>) -> MissionTrace {
        MissionTrace {
            header: TraceHeader {
                planner: "nbap".into(),
                robots: 1,
                tasks: 2,
                ground_truth_gain: 10.0,
                resource: 40.0,
                energy: 80.0,
            },
            events,
        }
    }

    #[test]
    fn empty_trace_is_all_zero() {
        assert_eq!(compute_metrics(&trace(vec![])), Metrics::default());
    }

    #[test]
    fn ratios() {
        let at = VertexId::new(1, 1);
        let mut events = Vec::new();
        events.push(Event::Attempt { robot: 0, at });
        events.push(Event::Abort {
            robot: 0,
            at,
            wasted: 2.5,
        });
        for _ in 0..99 {
            events.push(Event::Attempt { robot: 0, at });
            events.push(Event::Complete {
                robot: 0,
                at,
                cost: 0.05,
                gain: 0.05,
            });
        }
        let m = compute_metrics(&trace(events));
        assert_eq!(m.visited, 100);
        assert!((m.wv_ratio - 0.025).abs() < 1e-15);
        assert!((m.rv_ratio - 99.0 * 0.05 / 10.0 / 100.0).abs() < 1e-15);
        let c = curve(&trace(vec![
            Event::Attempt { robot: 0, at },
            Event::Complete {
                robot: 0,
                at,
                cost: 5.0,
                gain: 5.0,
            },
        ]));
        assert_eq!(
            c,
            vec![CurvePoint {
                visited: 1,
                gain_fraction: 0.5,
                waste: 0.0
            }]
        );
    }
}
